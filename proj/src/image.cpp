// SPDX-License-Identifier: Apache-2.0

#include "tfus/image.hpp"

#include <zlib.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace tfus {
namespace {

void put_be32(std::vector<unsigned char>& out, std::uint32_t v) {
  out.push_back(static_cast<unsigned char>((v >> 24) & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 16) & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
  out.push_back(static_cast<unsigned char>(v & 0xff));
}

void put_chunk(std::vector<unsigned char>& out, const char type[4],
               const std::vector<unsigned char>& payload) {
  put_be32(out, static_cast<std::uint32_t>(payload.size()));
  const std::size_t crc_start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), payload.begin(), payload.end());
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, out.data() + crc_start, static_cast<uInt>(out.size() - crc_start));
  put_be32(out, static_cast<std::uint32_t>(crc));
}

}  // namespace

void write_pgm(const std::filesystem::path& path, const std::vector<unsigned char>& pixels,
               int width, int height) {
  if (width <= 0 || height <= 0 ||
      pixels.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw ArgumentError("pgm pixel buffer does not match dimensions");
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot create " + path.string());
  f << "P5\n" << width << " " << height << "\n255\n";
  f.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
  if (!f) throw IoError("write failed for " + path.string());
}

void write_png_gray(const std::filesystem::path& path, const std::vector<unsigned char>& pixels,
                    int width, int height) {
  if (width <= 0 || height <= 0 ||
      pixels.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw ArgumentError("png pixel buffer does not match dimensions");
  }
  // filter byte 0 at the start of each scanline
  std::vector<unsigned char> raw;
  raw.reserve(pixels.size() + height);
  for (int y = 0; y < height; ++y) {
    raw.push_back(0);
    raw.insert(raw.end(), pixels.begin() + static_cast<std::ptrdiff_t>(y) * width,
               pixels.begin() + static_cast<std::ptrdiff_t>(y + 1) * width);
  }
  uLongf comp_size = compressBound(static_cast<uLong>(raw.size()));
  std::vector<unsigned char> compressed(comp_size);
  if (compress2(compressed.data(), &comp_size, raw.data(), static_cast<uLong>(raw.size()),
                Z_DEFAULT_COMPRESSION) != Z_OK) {
    throw IoError("png deflate failed");
  }
  compressed.resize(comp_size);

  std::vector<unsigned char> out = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
  std::vector<unsigned char> ihdr;
  put_be32(ihdr, static_cast<std::uint32_t>(width));
  put_be32(ihdr, static_cast<std::uint32_t>(height));
  ihdr.push_back(8);  // bit depth
  ihdr.push_back(0);  // grayscale
  ihdr.push_back(0);  // compression
  ihdr.push_back(0);  // filter
  ihdr.push_back(0);  // no interlace
  put_chunk(out, "IHDR", ihdr);
  put_chunk(out, "IDAT", compressed);
  put_chunk(out, "IEND", {});

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot create " + path.string());
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("write failed for " + path.string());
}

void export_slice_image(const ScalarField3D& field, int axis, int index,
                        const std::filesystem::path& path, ColorScale scale) {
  field.validate();
  if (axis < 0 || axis > 2) throw ArgumentError("slice axis must be 0, 1, or 2");
  if (index < 0 || index >= field.grid.dims[axis]) {
    throw ArgumentError("slice index " + std::to_string(index) + " out of range for axis " +
                        std::to_string(axis));
  }
  // image axes: the two remaining grid axes in (lower, higher) order; image
  // x = lower axis, image y = higher axis
  const int ax_u = axis == 0 ? 1 : 0;
  const int ax_v = axis == 2 ? 1 : 2;
  const int width = field.grid.dims[ax_u];
  const int height = field.grid.dims[ax_v];

  std::vector<double> slice(static_cast<std::size_t>(width) * height);
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      Index3 ijk;
      ijk[axis] = index;
      ijk[ax_u] = u;
      ijk[ax_v] = v;
      slice[static_cast<std::size_t>(v) * width + u] = field.at(ijk[0], ijk[1], ijk[2]);
    }
  }
  double lo = slice[0], hi = slice[0];
  for (double s : slice) {
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  std::vector<unsigned char> pixels(slice.size(), 128);
  if (hi > lo) {
    for (std::size_t n = 0; n < slice.size(); ++n) {
      double t = (slice[n] - lo) / (hi - lo);
      if (scale == ColorScale::Log) t = std::log1p(255.0 * t) / std::log1p(255.0);
      pixels[n] = static_cast<unsigned char>(std::lround(255.0 * t));
    }
  }
  const std::string ext = path.extension().string();
  if (ext == ".png") {
    write_png_gray(path, pixels, width, height);
  } else if (ext == ".pgm") {
    write_pgm(path, pixels, width, height);
  } else {
    throw ArgumentError("slice image extension must be .pgm or .png, got " + ext);
  }
}

}  // namespace tfus
