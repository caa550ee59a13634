// SPDX-License-Identifier: Apache-2.0

#include "tfus/transducer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tfus {

double BowlTransducer::half_angle() const {
  return std::asin(diameter / (2.0 * roc));
}

Vec3 BowlTransducer::axis() const {
  return orient_towards(position, focus);
}

void BowlTransducer::validate() const {
  if (!(roc > 0.0)) throw ArgumentError("transducer roc must be positive");
  if (!(diameter > 0.0) || diameter > 2.0 * roc) {
    throw ArgumentError("transducer diameter must satisfy 0 < diameter <= 2*roc");
  }
  if (std::abs(norm(focus - position) - roc) > 1e-6) {
    throw ArgumentError("|focus - position| must equal roc");
  }
  if (!(f0 > 0.0)) throw ArgumentError("transducer f0 must be positive");
  if (amplitude < 0.0) throw ArgumentError("transducer amplitude must be >= 0");
  if (ramp_cycles < 0.0) throw ArgumentError("transducer ramp_cycles must be >= 0");
}

double SourceSet::weight_sum() const {
  double s = 0.0;
  for (const auto& n : nodes) s += n.weight;
  return s;
}

Vec3 orient_towards(const Vec3& position, const Vec3& target) {
  const Vec3 d = target - position;
  const double len = norm(d);
  if (!(len > 0.0)) throw ArgumentError("orient_towards requires position != target");
  return {d[0] / len, d[1] / len, d[2] / len};
}

std::vector<Vec3> sample_bowl_surface(const BowlTransducer& t, double point_spacing_mm) {
  t.validate();
  if (!(point_spacing_mm > 0.0)) throw ArgumentError("point spacing must be positive");

  const double theta = t.half_angle();
  const double cap_area = 2.0 * M_PI * t.roc * t.roc * (1.0 - std::cos(theta));
  const auto n = static_cast<std::size_t>(
      std::max<long long>(1, std::llround(cap_area / (point_spacing_mm * point_spacing_mm))));

  // orthonormal frame about the apex direction (focus -> apex)
  const Vec3 d = orient_towards(t.focus, t.position);
  int smallest = 0;
  for (int a = 1; a < 3; ++a) {
    if (std::abs(d[a]) < std::abs(d[smallest])) smallest = a;
  }
  Vec3 ref{0, 0, 0};
  ref[smallest] = 1.0;
  Vec3 e1 = cross(d, ref);
  const double e1n = norm(e1);
  e1 = {e1[0] / e1n, e1[1] / e1n, e1[2] / e1n};
  const Vec3 e2 = cross(d, e1);

  // Fibonacci spiral: equal solid-angle strips with golden-angle azimuths
  const double golden_angle = M_PI * (3.0 - std::sqrt(5.0));
  std::vector<Vec3> points;
  points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    const double cos_psi = 1.0 - u * (1.0 - std::cos(theta));
    const double sin_psi = std::sqrt(std::max(0.0, 1.0 - cos_psi * cos_psi));
    const double phi = golden_angle * static_cast<double>(i);
    const double c1 = std::cos(phi) * sin_psi;
    const double c2 = std::sin(phi) * sin_psi;
    points.push_back({t.focus[0] + t.roc * (cos_psi * d[0] + c1 * e1[0] + c2 * e2[0]),
                      t.focus[1] + t.roc * (cos_psi * d[1] + c1 * e1[1] + c2 * e2[1]),
                      t.focus[2] + t.roc * (cos_psi * d[2] + c1 * e1[2] + c2 * e2[2])});
  }
  return points;
}

SourceSet rasterize_source(const std::vector<Vec3>& points, const GridSpec& grid) {
  grid.validate();
  std::vector<std::pair<std::size_t, double>> raw;
  raw.reserve(points.size() * 8);

  for (const Vec3& p : points) {
    double g[3];
    for (int a = 0; a < 3; ++a) {
      g[a] = (p[a] - grid.origin[a]) / grid.spacing[a];
      if (g[a] < 0.0 || g[a] > grid.dims[a] - 1.0) {
        std::ostringstream os;
        os << "source point (" << p[0] << ", " << p[1] << ", " << p[2]
           << ") mm lies outside the grid";
        throw ArgumentError(os.str());
      }
    }
    int i0[3];
    double f[3];
    for (int a = 0; a < 3; ++a) {
      i0[a] = std::min(static_cast<int>(g[a]), grid.dims[a] - 2 >= 0 ? grid.dims[a] - 2 : 0);
      f[a] = g[a] - i0[a];
    }
    for (int corner = 0; corner < 8; ++corner) {
      const int di = corner & 1, dj = (corner >> 1) & 1, dk = (corner >> 2) & 1;
      const double w = (di ? f[0] : 1.0 - f[0]) * (dj ? f[1] : 1.0 - f[1]) * (dk ? f[2] : 1.0 - f[2]);
      if (w > 0.0) {
        raw.emplace_back(grid.linear(i0[0] + di, i0[1] + dj, i0[2] + dk), w);
      }
    }
  }

  // sorted merge keeps accumulation order deterministic
  std::sort(raw.begin(), raw.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  SourceSet src;
  src.n_points = points.size();
  for (std::size_t i = 0; i < raw.size();) {
    const std::size_t idx = raw[i].first;
    double w = 0.0;
    while (i < raw.size() && raw[i].first == idx) {
      w += raw[i].second;
      ++i;
    }
    src.nodes.push_back({idx, static_cast<float>(w)});
  }
  return src;
}

SourceSet make_source(const BowlTransducer& t, const GridSpec& grid, double point_spacing_mm) {
  if (!grid.isotropic()) throw ArgumentError("source rasterization requires an isotropic grid");
  const auto points = sample_bowl_surface(t, point_spacing_mm);
  SourceSet src = rasterize_source(points, grid);
  src.point_spacing = point_spacing_mm;
  const double dx = grid.spacing[0];
  src.calibration = (point_spacing_mm * point_spacing_mm) / (dx * dx);
  return src;
}

double drive_signal(const BowlTransducer& t, double time_s) {
  if (time_s < 0.0) throw ArgumentError("drive_signal requires time >= 0");
  double env = 1.0;
  if (t.ramp_cycles > 0.0) {
    const double ramp_time = t.ramp_cycles / t.f0;
    if (time_s < ramp_time) {
      env = 0.5 * (1.0 - std::cos(M_PI * time_s / ramp_time));
    }
  }
  return t.amplitude * env * std::cos(2.0 * M_PI * t.f0 * time_s + t.phase);
}

Vec3 geometric_focus(const BowlTransducer& t) {
  t.validate();
  return t.focus;
}

}  // namespace tfus
