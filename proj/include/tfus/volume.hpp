// SPDX-License-Identifier: Apache-2.0
//
// Volume-level operations: synthetic phantoms, normalization transforms,
// trilinear resampling, and npz-backed volume archives.

#pragma once

#include <filesystem>

#include "tfus/types.hpp"

namespace tfus {

// Spherical shell of value skull_hu centered on the voxel at index
// floor(N/2) per axis, zero elsewhere. Shell spans [outer_radius - thickness,
// outer_radius] in mm from the center.
ScalarField3D make_skull_phantom(const GridSpec& grid, double outer_radius_mm,
                                 double thickness_mm, float skull_hu);

// (x - min) / (max - min); a constant field maps to all zeros.
ScalarField3D minmax_normalize(const ScalarField3D& field);

// Elementwise log(1 + x); input must be non-negative.
ScalarField3D log_compress(const ScalarField3D& field);

// Trilinear resampling onto an isotropic grid covering the same physical
// extent, with edge clamping. Identity when the spacing already matches.
ScalarField3D resample_isotropic(const ScalarField3D& field, double target_spacing_mm);

// Volume archive: npz with members {ct, spacing, origin}. Used for phantoms
// and any grid-tagged scalar volume.
void write_volume_npz(const std::filesystem::path& path, const ScalarField3D& field,
                      bool compress = false);
ScalarField3D read_volume_npz(const std::filesystem::path& path, Unit units = Unit::HU);

// Reads either a volume npz or a NIfTI file, keyed on extension.
ScalarField3D read_volume(const std::filesystem::path& path, Unit units = Unit::HU);

}  // namespace tfus
