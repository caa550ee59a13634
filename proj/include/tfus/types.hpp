// SPDX-License-Identifier: Apache-2.0
//
// Core value types shared across the simulation pipeline: the 3D grid
// descriptor, the dense scalar volume that carries CT/medium/pressure data,
// and the error hierarchy.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace tfus {

// Errors are split by origin so the CLI can map them onto exit codes.
struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DivergenceError : std::runtime_error {
  DivergenceError(const std::string& what, std::int64_t step)
      : std::runtime_error(what), step_index(step) {}
  std::int64_t step_index;
};

using Vec3 = std::array<double, 3>;
using Index3 = std::array<int, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(const Vec3& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

// Unit tag carried by every scalar volume. "Absorption" is the power-law
// prefactor alpha_0 in dB/(MHz^y cm).
enum class Unit { HU, Density, SoundSpeed, Absorption, Pressure, Dimensionless };

const char* unit_label(Unit u);

// Regular 3D grid. Voxel (i,j,k) has its center at origin + (i,j,k)*spacing,
// values are stored x-fastest: linear = i + nx*(j + ny*k).
struct GridSpec {
  Index3 dims{0, 0, 0};       // voxels
  Vec3 spacing{1.0, 1.0, 1.0};  // mm per voxel
  Vec3 origin{0.0, 0.0, 0.0};   // mm, world position of voxel (0,0,0) center

  std::size_t voxel_count() const {
    return static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) *
           static_cast<std::size_t>(dims[2]);
  }
  std::size_t linear(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dims[0]) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(k));
  }
  Index3 unlinear(std::size_t idx) const {
    const auto nx = static_cast<std::size_t>(dims[0]);
    const auto ny = static_cast<std::size_t>(dims[1]);
    return {static_cast<int>(idx % nx), static_cast<int>((idx / nx) % ny),
            static_cast<int>(idx / (nx * ny))};
  }
  bool contains(int i, int j, int k) const {
    return i >= 0 && j >= 0 && k >= 0 && i < dims[0] && j < dims[1] && k < dims[2];
  }
  Vec3 voxel_center(int i, int j, int k) const {
    return {origin[0] + i * spacing[0], origin[1] + j * spacing[1], origin[2] + k * spacing[2]};
  }
  // Physical side lengths, N * spacing per axis (used for transit-time bounds).
  Vec3 extent() const {
    return {dims[0] * spacing[0], dims[1] * spacing[1], dims[2] * spacing[2]};
  }
  bool isotropic(double tol_mm = 1e-9) const {
    return std::abs(spacing[0] - spacing[1]) <= tol_mm && std::abs(spacing[1] - spacing[2]) <= tol_mm;
  }
  void validate() const;
  bool operator==(const GridSpec&) const = default;
};

// Dense scalar volume over a GridSpec. Single precision: the pipeline's
// largest volumes are 256^3 and memory is the binding constraint.
struct ScalarField3D {
  GridSpec grid;
  std::vector<float> values;
  Unit units = Unit::Dimensionless;

  ScalarField3D() = default;
  ScalarField3D(GridSpec g, Unit u, float fill = 0.0f)
      : grid(g), values(g.voxel_count(), fill), units(u) {}

  float& at(int i, int j, int k) { return values[grid.linear(i, j, k)]; }
  float at(int i, int j, int k) const { return values[grid.linear(i, j, k)]; }

  void validate() const;          // dims/spacing sane, size matches
  void require_finite() const;    // throws FormatError on NaN/Inf

  float min_value() const;
  float max_value() const;
  // Argmax with the lowest linear index winning ties.
  std::size_t argmax() const;
};

std::string to_string(const GridSpec& g);

}  // namespace tfus
