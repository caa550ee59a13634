// SPDX-License-Identifier: Apache-2.0
//
// NIfTI-1 single-file (.nii, .nii.gz) volume reader. Little-endian files
// only, 3D volumes only, no axis reorientation: voxel (i,j,k) maps straight
// into the field with pixdim as spacing and qoffset as origin.

#pragma once

#include <filesystem>

#include "tfus/types.hpp"

namespace tfus {

// Supported on-disk datatypes: uint8, int16, int32, float32, float64.
// Values are converted to float; scl_slope/scl_inter are applied when set.
ScalarField3D read_nifti(const std::filesystem::path& path, Unit units = Unit::HU);

}  // namespace tfus
