// SPDX-License-Identifier: Apache-2.0
//
// Focused bowl source: spherical-cap geometry, quasi-uniform surface
// sampling, trilinear grid deposition, and the continuous-wave drive.

#pragma once

#include <cstdint>
#include <vector>

#include "tfus/types.hpp"

namespace tfus {

struct BowlTransducer {
  Vec3 position{0, 0, 0};  // mm, outer apex of the bowl
  Vec3 focus{0, 0, 0};     // mm, geometric focus = center of curvature
  double roc = 0.0;        // mm
  double diameter = 0.0;   // mm, aperture
  double f0 = 0.0;         // Hz
  double amplitude = 0.0;  // Pa
  double phase = 0.0;      // rad
  double ramp_cycles = 2.0;

  // arcsin(diameter / (2 roc)), the cap half-angle about the bowl axis
  double half_angle() const;
  Vec3 axis() const;  // unit vector position -> focus
  void validate() const;
};

struct SourceNode {
  std::size_t index;  // linear voxel index
  float weight;
};

struct SourceSet {
  std::vector<SourceNode> nodes;
  std::size_t n_points = 0;       // surface sample count the weights sum to
  double point_spacing = 0.0;     // mm, 0 when built from raw points
  // Per-voxel drive scale for surface-sampled sources. A flat patch sampled
  // at spacing s deposits (dx/s)^2 points per voxel of cross-section, so the
  // per-point drive is scaled by s^2/dx^2 to make a plane of unit-weight
  // voxels emit exactly the drive amplitude. 1 when nodes are given per-voxel.
  double calibration = 1.0;

  double weight_sum() const;
};

// (target - position) / |target - position|
Vec3 orient_towards(const Vec3& position, const Vec3& target);

// Quasi-uniform sample points (mm, world) on the spherical cap, generated
// with a Fibonacci spiral over the cap's solid angle.
std::vector<Vec3> sample_bowl_surface(const BowlTransducer& t, double point_spacing_mm);

// Deposits each point onto its 8 surrounding voxels with trilinear weights.
// Node order is deterministic (sorted by linear index).
SourceSet rasterize_source(const std::vector<Vec3>& points, const GridSpec& grid);

// sample + rasterize + calibration in one step
SourceSet make_source(const BowlTransducer& t, const GridSpec& grid, double point_spacing_mm);

// A cos(2 pi f0 t + phase) under a cosine onset envelope that ramps from 0
// to 1 over ramp_cycles periods.
double drive_signal(const BowlTransducer& t, double time_s);

Vec3 geometric_focus(const BowlTransducer& t);

}  // namespace tfus
