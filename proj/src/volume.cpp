// SPDX-License-Identifier: Apache-2.0

#include "tfus/volume.hpp"

#include <algorithm>
#include <cmath>

#include "tfus/nifti.hpp"
#include "tfus/npy.hpp"

namespace tfus {

ScalarField3D make_skull_phantom(const GridSpec& grid, double outer_radius_mm,
                                 double thickness_mm, float skull_hu) {
  grid.validate();
  if (!(thickness_mm > 0.0) || thickness_mm >= outer_radius_mm) {
    throw ArgumentError("phantom requires 0 < thickness < outer_radius");
  }
  const Vec3 center = grid.voxel_center(grid.dims[0] / 2, grid.dims[1] / 2, grid.dims[2] / 2);
  for (int a = 0; a < 3; ++a) {
    const double lo = center[a] - grid.origin[a];
    const double hi = grid.origin[a] + (grid.dims[a] - 1) * grid.spacing[a] - center[a];
    if (outer_radius_mm > lo || outer_radius_mm > hi) {
      throw ArgumentError("phantom shell of radius " + std::to_string(outer_radius_mm) +
                          " mm exceeds grid bounds");
    }
  }

  ScalarField3D field(grid, Unit::HU, 0.0f);
  const double inner = outer_radius_mm - thickness_mm;
  for (int k = 0; k < grid.dims[2]; ++k) {
    for (int j = 0; j < grid.dims[1]; ++j) {
      for (int i = 0; i < grid.dims[0]; ++i) {
        const Vec3 d = grid.voxel_center(i, j, k) - center;
        const double r = norm(d);
        if (r >= inner && r <= outer_radius_mm) {
          field.at(i, j, k) = skull_hu;
        }
      }
    }
  }
  return field;
}

ScalarField3D minmax_normalize(const ScalarField3D& field) {
  field.validate();
  const float lo = field.min_value();
  const float hi = field.max_value();
  ScalarField3D out(field.grid, Unit::Dimensionless);
  if (hi > lo) {
    const float inv = 1.0f / (hi - lo);
    for (std::size_t n = 0; n < out.values.size(); ++n) {
      out.values[n] = (field.values[n] - lo) * inv;
    }
  }
  return out;
}

ScalarField3D log_compress(const ScalarField3D& field) {
  field.validate();
  ScalarField3D out(field.grid, Unit::Dimensionless);
  for (std::size_t n = 0; n < out.values.size(); ++n) {
    const float v = field.values[n];
    if (v < 0.0f) {
      throw ArgumentError("log_compress requires non-negative values");
    }
    out.values[n] = std::log1p(v);
  }
  return out;
}

namespace {

float sample_trilinear(const ScalarField3D& f, double x, double y, double z) {
  // coordinates in voxel units of f, edge-clamped
  const auto clampd = [](double v, double lo, double hi) { return std::min(std::max(v, lo), hi); };
  x = clampd(x, 0.0, f.grid.dims[0] - 1.0);
  y = clampd(y, 0.0, f.grid.dims[1] - 1.0);
  z = clampd(z, 0.0, f.grid.dims[2] - 1.0);
  const int i0 = std::min(static_cast<int>(x), f.grid.dims[0] - 2 >= 0 ? f.grid.dims[0] - 2 : 0);
  const int j0 = std::min(static_cast<int>(y), f.grid.dims[1] - 2 >= 0 ? f.grid.dims[1] - 2 : 0);
  const int k0 = std::min(static_cast<int>(z), f.grid.dims[2] - 2 >= 0 ? f.grid.dims[2] - 2 : 0);
  const int i1 = std::min(i0 + 1, f.grid.dims[0] - 1);
  const int j1 = std::min(j0 + 1, f.grid.dims[1] - 1);
  const int k1 = std::min(k0 + 1, f.grid.dims[2] - 1);
  const double fx = x - i0, fy = y - j0, fz = z - k0;
  const double c00 = f.at(i0, j0, k0) * (1 - fx) + f.at(i1, j0, k0) * fx;
  const double c10 = f.at(i0, j1, k0) * (1 - fx) + f.at(i1, j1, k0) * fx;
  const double c01 = f.at(i0, j0, k1) * (1 - fx) + f.at(i1, j0, k1) * fx;
  const double c11 = f.at(i0, j1, k1) * (1 - fx) + f.at(i1, j1, k1) * fx;
  const double c0 = c00 * (1 - fy) + c10 * fy;
  const double c1 = c01 * (1 - fy) + c11 * fy;
  return static_cast<float>(c0 * (1 - fz) + c1 * fz);
}

}  // namespace

ScalarField3D resample_isotropic(const ScalarField3D& field, double target_spacing_mm) {
  field.validate();
  if (!(target_spacing_mm > 0.0)) {
    throw ArgumentError("target spacing must be positive");
  }
  bool identity = field.grid.isotropic();
  for (int a = 0; a < 3; ++a) {
    if (std::abs(field.grid.spacing[a] - target_spacing_mm) > 1e-9) identity = false;
  }
  if (identity) return field;

  GridSpec out_grid;
  out_grid.origin = field.grid.origin;
  out_grid.spacing = {target_spacing_mm, target_spacing_mm, target_spacing_mm};
  for (int a = 0; a < 3; ++a) {
    const double extent = (field.grid.dims[a] - 1) * field.grid.spacing[a];
    out_grid.dims[a] = std::max(1, static_cast<int>(std::floor(extent / target_spacing_mm)) + 1);
  }
  ScalarField3D out(out_grid, field.units);
  for (int k = 0; k < out_grid.dims[2]; ++k) {
    for (int j = 0; j < out_grid.dims[1]; ++j) {
      for (int i = 0; i < out_grid.dims[0]; ++i) {
        const double x = i * target_spacing_mm / field.grid.spacing[0];
        const double y = j * target_spacing_mm / field.grid.spacing[1];
        const double z = k * target_spacing_mm / field.grid.spacing[2];
        out.at(i, j, k) = sample_trilinear(field, x, y, z);
      }
    }
  }
  return out;
}

void write_volume_npz(const std::filesystem::path& path, const ScalarField3D& field,
                      bool compress) {
  field.validate();
  npy::Entries entries;
  const auto& g = field.grid;
  // npy shape convention is row-major (slowest axis first), so dims reversed
  npy::Array data;
  data.dtype = npy::Dtype::f4;
  data.shape = {static_cast<std::size_t>(g.dims[2]), static_cast<std::size_t>(g.dims[1]),
                static_cast<std::size_t>(g.dims[0])};
  data.data.resize(field.values.size() * sizeof(float));
  std::memcpy(data.data.data(), field.values.data(), data.data.size());
  entries.emplace_back("ct", std::move(data));
  entries.emplace_back("spacing", npy::Array::from<double>({3}, {g.spacing[0], g.spacing[1], g.spacing[2]}));
  entries.emplace_back("origin", npy::Array::from<double>({3}, {g.origin[0], g.origin[1], g.origin[2]}));
  npy::write_npz(path, entries, compress);
}

ScalarField3D read_volume_npz(const std::filesystem::path& path, Unit units) {
  const auto entries = npy::read_npz(path);
  const npy::Array* data = nullptr;
  const npy::Array* spacing = nullptr;
  const npy::Array* origin = nullptr;
  for (const auto& [name, a] : entries) {
    if (name == "ct") data = &a;
    else if (name == "spacing") spacing = &a;
    else if (name == "origin") origin = &a;
  }
  if (!data) throw FormatError("volume npz missing member ct: " + path.string());
  if (data->shape.size() != 3) throw FormatError("volume member ct must be 3D");

  GridSpec grid;
  grid.dims = {static_cast<int>(data->shape[2]), static_cast<int>(data->shape[1]),
               static_cast<int>(data->shape[0])};
  if (spacing) {
    const auto s = spacing->as<double>();
    if (s.size() != 3) throw FormatError("volume member spacing must have 3 entries");
    grid.spacing = {s[0], s[1], s[2]};
  }
  if (origin) {
    const auto o = origin->as<double>();
    if (o.size() != 3) throw FormatError("volume member origin must have 3 entries");
    grid.origin = {o[0], o[1], o[2]};
  }
  grid.validate();

  ScalarField3D field(grid, units);
  if (data->dtype == npy::Dtype::f4) {
    std::memcpy(field.values.data(), data->data.data(), data->data.size());
  } else if (data->dtype == npy::Dtype::f8) {
    const auto v = data->as<double>();
    for (std::size_t n = 0; n < v.size(); ++n) field.values[n] = static_cast<float>(v[n]);
  } else if (data->dtype == npy::Dtype::i2) {
    const auto v = data->as<std::int16_t>();
    for (std::size_t n = 0; n < v.size(); ++n) field.values[n] = static_cast<float>(v[n]);
  } else {
    throw FormatError("volume member ct has unsupported dtype");
  }
  field.require_finite();
  return field;
}

ScalarField3D read_volume(const std::filesystem::path& path, Unit units) {
  const std::string name = path.filename().string();
  const auto ends_with = [&name](const char* suffix) {
    const std::string s(suffix);
    return name.size() >= s.size() && name.compare(name.size() - s.size(), s.size(), s) == 0;
  };
  if (ends_with(".npz")) return read_volume_npz(path, units);
  if (ends_with(".nii") || ends_with(".nii.gz")) return read_nifti(path, units);
  throw ArgumentError("unsupported volume format (expected .npz, .nii, .nii.gz): " + path.string());
}

}  // namespace tfus
