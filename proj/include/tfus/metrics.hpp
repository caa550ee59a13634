// SPDX-License-Identifier: Apache-2.0
//
// Evaluation metrics and loss functionals over pairs of normalized pressure
// fields. All functions are pure; relative_l2 returns the raw ratio (the
// report layer scales to percent).

#pragma once

#include <vector>

#include "tfus/types.hpp"

namespace tfus {

struct MetricParams {
  double alpha_weight = 5.0;  // exponential weighting sharpness
  double lambda = 0.1;        // gradient-loss weight in the composite
  Vec3 spacing{1.0, 1.0, 1.0};  // mm, for focal distance

  void validate() const;
};

struct FieldMetrics {
  double relative_l2 = 0.0;           // dimensionless ratio
  double focal_position_error = 0.0;  // mm
  double max_pressure_error = 0.0;    // percent
  double weighted_mse = 0.0;
  double grad_loss = 0.0;
  double composite = 0.0;
};

// sqrt(||pred - gt||^2 / ||gt||^2)
double relative_l2(const ScalarField3D& pred, const ScalarField3D& gt);

// Euclidean distance in mm between argmax voxel centers (lowest linear index
// wins ties).
double focal_position_error(const ScalarField3D& pred, const ScalarField3D& gt, Vec3 spacing);

// 100 * |max(pred) - max(gt)| / max(gt)
double max_pressure_error(const ScalarField3D& pred, const ScalarField3D& gt);

// mean_v[w(v) * (pred - gt)^2], w = exp(alpha*(gt - max gt)) normalized to
// mean 1; weights depend on gt only.
double weighted_mse(const ScalarField3D& pred, const ScalarField3D& gt, double alpha_weight);

// (1/3) sum_axes mean((grad_a pred - grad_a gt)^2), central differences in
// the interior and one-sided at boundaries. Gradients are per-voxel by
// default; spacing_aware divides by the voxel spacing (per-mm).
double gradient_loss(const ScalarField3D& pred, const ScalarField3D& gt,
                     bool spacing_aware = false);

// weighted_mse + lambda * gradient_loss
double composite_loss(const ScalarField3D& pred, const ScalarField3D& gt,
                      const MetricParams& params);

FieldMetrics compute_metrics(const ScalarField3D& pred, const ScalarField3D& gt,
                             const MetricParams& params);

struct MetricSummary {
  double median = 0.0;
  double mean = 0.0;
  double std_dev = 0.0;  // population convention
};

struct MetricsSummary {
  MetricSummary relative_l2;
  MetricSummary focal_position_error;
  MetricSummary max_pressure_error;
  MetricSummary weighted_mse;
  MetricSummary grad_loss;
  MetricSummary composite;
};

MetricSummary summarize_values(std::vector<double> values);
MetricsSummary summarize(const std::vector<FieldMetrics>& samples);

}  // namespace tfus
