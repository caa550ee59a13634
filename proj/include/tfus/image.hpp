// SPDX-License-Identifier: Apache-2.0
//
// Slice inspection images: 8-bit grayscale PGM (P5) and PNG.

#pragma once

#include <filesystem>

#include "tfus/types.hpp"

namespace tfus {

enum class ColorScale { Linear, Log };

// Extracts the slice at `index` along `axis` (0=x, 1=y, 2=z), min-max scales
// it to 8 bits (optionally after log(1+x) on the shifted-positive values),
// and writes PGM or PNG depending on the file extension (.pgm / .png).
void export_slice_image(const ScalarField3D& field, int axis, int index,
                        const std::filesystem::path& path,
                        ColorScale scale = ColorScale::Linear);

// Raw encoders, row-major top-to-bottom grayscale.
void write_pgm(const std::filesystem::path& path, const std::vector<unsigned char>& pixels,
               int width, int height);
void write_png_gray(const std::filesystem::path& path, const std::vector<unsigned char>& pixels,
                    int width, int height);

}  // namespace tfus
