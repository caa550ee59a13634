// SPDX-License-Identifier: Apache-2.0

#include "tfus/nifti.hpp"

#include <zlib.h>

#include <cstring>
#include <vector>

namespace tfus {
namespace {

// gzread handles both gzip-compressed and plain files, so one path covers
// .nii and .nii.gz.
std::vector<unsigned char> read_maybe_gz(const std::filesystem::path& path) {
  gzFile f = gzopen(path.string().c_str(), "rb");
  if (!f) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes;
  std::vector<unsigned char> chunk(1 << 20);
  int n;
  while ((n = gzread(f, chunk.data(), static_cast<unsigned>(chunk.size()))) > 0) {
    bytes.insert(bytes.end(), chunk.begin(), chunk.begin() + n);
  }
  const bool bad = n < 0;
  gzclose(f);
  if (bad) throw IoError("decompression failed for " + path.string());
  return bytes;
}

template <typename T>
T le(const unsigned char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

}  // namespace

ScalarField3D read_nifti(const std::filesystem::path& path, Unit units) {
  const auto bytes = read_maybe_gz(path);
  if (bytes.size() < 352) throw FormatError("NIfTI file too small: " + path.string());

  const auto sizeof_hdr = le<std::int32_t>(bytes.data());
  if (sizeof_hdr != 348) {
    if (sizeof_hdr == 0x5c010000) {
      throw FormatError("big-endian NIfTI files are not supported: " + path.string());
    }
    throw FormatError("not a NIfTI-1 file (sizeof_hdr != 348): " + path.string());
  }
  const char* magic = reinterpret_cast<const char*>(bytes.data() + 344);
  if (std::strncmp(magic, "n+1", 3) != 0) {
    throw FormatError("only single-file NIfTI (magic n+1) is supported: " + path.string());
  }

  std::int16_t dim[8];
  for (int i = 0; i < 8; ++i) dim[i] = le<std::int16_t>(bytes.data() + 40 + 2 * i);
  if (dim[0] < 3) throw FormatError("NIfTI volume is not 3D");
  for (int i = 4; i <= dim[0] && i < 8; ++i) {
    if (dim[i] > 1) throw FormatError("NIfTI volumes with a 4th dimension are not supported");
  }

  const auto datatype = le<std::int16_t>(bytes.data() + 70);
  const auto vox_offset = static_cast<std::size_t>(le<float>(bytes.data() + 108));
  float scl_slope = le<float>(bytes.data() + 112);
  const float scl_inter = le<float>(bytes.data() + 116);
  if (scl_slope == 0.0f) scl_slope = 1.0f;

  GridSpec grid;
  grid.dims = {dim[1], dim[2], dim[3]};
  for (int a = 0; a < 3; ++a) {
    grid.spacing[a] = le<float>(bytes.data() + 76 + 4 * (a + 1));
  }
  grid.origin = {le<float>(bytes.data() + 268), le<float>(bytes.data() + 272),
                 le<float>(bytes.data() + 276)};
  grid.validate();

  const std::size_t count = grid.voxel_count();
  std::size_t elem = 0;
  switch (datatype) {
    case 2: elem = 1; break;    // uint8
    case 4: elem = 2; break;    // int16
    case 8: elem = 4; break;    // int32
    case 16: elem = 4; break;   // float32
    case 64: elem = 8; break;   // float64
    default:
      throw FormatError("unsupported NIfTI datatype code " + std::to_string(datatype));
  }
  if (vox_offset < 352 || vox_offset + count * elem > bytes.size()) {
    throw FormatError("NIfTI voxel data truncated: " + path.string());
  }

  ScalarField3D field(grid, units);
  const unsigned char* src = bytes.data() + vox_offset;
  for (std::size_t n = 0; n < count; ++n) {
    double raw = 0.0;
    switch (datatype) {
      case 2: raw = src[n]; break;
      case 4: raw = le<std::int16_t>(src + 2 * n); break;
      case 8: raw = le<std::int32_t>(src + 4 * n); break;
      case 16: raw = le<float>(src + 4 * n); break;
      case 64: raw = le<double>(src + 8 * n); break;
    }
    field.values[n] = static_cast<float>(raw * scl_slope + scl_inter);
  }
  field.require_finite();
  return field;
}

}  // namespace tfus
