// SPDX-License-Identifier: Apache-2.0

#include "tfus/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace tfus {
namespace {

void require_same_shape(const ScalarField3D& pred, const ScalarField3D& gt) {
  pred.validate();
  gt.validate();
  if (pred.grid.dims != gt.grid.dims) {
    throw ArgumentError("predicted and reference fields have different shapes");
  }
}

}  // namespace

void MetricParams::validate() const {
  if (!(alpha_weight >= 0.0)) throw ArgumentError("alpha_weight must be non-negative");
  if (!(lambda >= 0.0)) throw ArgumentError("lambda must be non-negative");
  for (double s : spacing) {
    if (!(s > 0.0)) throw ArgumentError("spacing must be positive");
  }
}

double relative_l2(const ScalarField3D& pred, const ScalarField3D& gt) {
  require_same_shape(pred, gt);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < gt.values.size(); ++i) {
    const double d = static_cast<double>(pred.values[i]) - static_cast<double>(gt.values[i]);
    num += d * d;
    den += static_cast<double>(gt.values[i]) * static_cast<double>(gt.values[i]);
  }
  if (!(den > 0.0)) throw ArgumentError("reference field has zero norm");
  return std::sqrt(num / den);
}

double focal_position_error(const ScalarField3D& pred, const ScalarField3D& gt, Vec3 spacing) {
  require_same_shape(pred, gt);
  for (double s : spacing) {
    if (!(s > 0.0)) throw ArgumentError("spacing must be positive");
  }
  const Index3 a = pred.grid.unlinear(pred.argmax());
  const Index3 b = gt.grid.unlinear(gt.argmax());
  double sum = 0.0;
  for (int axis = 0; axis < 3; ++axis) {
    const double d = (a[axis] - b[axis]) * spacing[axis];
    sum += d * d;
  }
  return std::sqrt(sum);
}

double max_pressure_error(const ScalarField3D& pred, const ScalarField3D& gt) {
  require_same_shape(pred, gt);
  const double gmax = static_cast<double>(gt.max_value());
  if (!(gmax > 0.0)) throw ArgumentError("reference field maximum must be positive");
  const double pmax = static_cast<double>(pred.max_value());
  return 100.0 * std::abs(pmax - gmax) / gmax;
}

double weighted_mse(const ScalarField3D& pred, const ScalarField3D& gt, double alpha_weight) {
  require_same_shape(pred, gt);
  if (!(alpha_weight >= 0.0)) throw ArgumentError("alpha_weight must be non-negative");
  const double gmax = static_cast<double>(gt.max_value());
  double weight_sum = 0.0, loss_sum = 0.0;
  for (std::size_t i = 0; i < gt.values.size(); ++i) {
    const double g = static_cast<double>(gt.values[i]);
    const double w = std::exp(alpha_weight * (g - gmax));
    const double d = static_cast<double>(pred.values[i]) - g;
    weight_sum += w;
    loss_sum += w * d * d;
  }
  return loss_sum / weight_sum;
}

double gradient_loss(const ScalarField3D& pred, const ScalarField3D& gt, bool spacing_aware) {
  require_same_shape(pred, gt);
  const Index3 nd = gt.grid.dims;
  for (int a = 0; a < 3; ++a) {
    if (nd[a] < 2) throw ArgumentError("gradient_loss needs at least 2 voxels per axis");
  }
  const std::size_t n = gt.values.size();
  const std::size_t stride[3] = {1, static_cast<std::size_t>(nd[0]),
                                 static_cast<std::size_t>(nd[0]) * nd[1]};
  double total = 0.0;
  for (int a = 0; a < 3; ++a) {
    const double scale = spacing_aware ? 1.0 / gt.grid.spacing[a] : 1.0;
    double axis_sum = 0.0;
    std::size_t idx = 0;
    for (int k = 0; k < nd[2]; ++k) {
      for (int j = 0; j < nd[1]; ++j) {
        for (int i = 0; i < nd[0]; ++i, ++idx) {
          const int c = a == 0 ? i : (a == 1 ? j : k);
          double gp, gg;
          if (c == 0) {
            gp = pred.values[idx + stride[a]] - pred.values[idx];
            gg = gt.values[idx + stride[a]] - gt.values[idx];
          } else if (c == nd[a] - 1) {
            gp = pred.values[idx] - pred.values[idx - stride[a]];
            gg = gt.values[idx] - gt.values[idx - stride[a]];
          } else {
            gp = 0.5 * (pred.values[idx + stride[a]] - pred.values[idx - stride[a]]);
            gg = 0.5 * (gt.values[idx + stride[a]] - gt.values[idx - stride[a]]);
          }
          const double d = (gp - gg) * scale;
          axis_sum += d * d;
        }
      }
    }
    total += axis_sum / static_cast<double>(n);
  }
  return total / 3.0;
}

double composite_loss(const ScalarField3D& pred, const ScalarField3D& gt,
                      const MetricParams& params) {
  params.validate();
  return weighted_mse(pred, gt, params.alpha_weight) +
         params.lambda * gradient_loss(pred, gt);
}

FieldMetrics compute_metrics(const ScalarField3D& pred, const ScalarField3D& gt,
                             const MetricParams& params) {
  params.validate();
  FieldMetrics m;
  m.relative_l2 = relative_l2(pred, gt);
  m.focal_position_error = focal_position_error(pred, gt, params.spacing);
  m.max_pressure_error = max_pressure_error(pred, gt);
  m.weighted_mse = weighted_mse(pred, gt, params.alpha_weight);
  m.grad_loss = gradient_loss(pred, gt);
  m.composite = m.weighted_mse + params.lambda * m.grad_loss;
  return m;
}

MetricSummary summarize_values(std::vector<double> values) {
  if (values.empty()) throw ArgumentError("cannot summarize an empty sample list");
  std::sort(values.begin(), values.end());
  MetricSummary s;
  const std::size_t n = values.size();
  s.median = n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(n);
  double var = 0.0;
  for (double v : values) var += (v - s.mean) * (v - s.mean);
  s.std_dev = std::sqrt(var / static_cast<double>(n));
  return s;
}

MetricsSummary summarize(const std::vector<FieldMetrics>& samples) {
  if (samples.empty()) throw ArgumentError("cannot summarize an empty sample list");
  const auto collect = [&](double FieldMetrics::* field) {
    std::vector<double> v;
    v.reserve(samples.size());
    for (const FieldMetrics& m : samples) v.push_back(m.*field);
    return summarize_values(std::move(v));
  };
  MetricsSummary out;
  out.relative_l2 = collect(&FieldMetrics::relative_l2);
  out.focal_position_error = collect(&FieldMetrics::focal_position_error);
  out.max_pressure_error = collect(&FieldMetrics::max_pressure_error);
  out.weighted_mse = collect(&FieldMetrics::weighted_mse);
  out.grad_loss = collect(&FieldMetrics::grad_loss);
  out.composite = collect(&FieldMetrics::composite);
  return out;
}

}  // namespace tfus
