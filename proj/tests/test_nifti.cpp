// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include <filesystem>
#include <string>

#include "oracles.hpp"
#include "tfus/nifti.hpp"
#include "tfus/types.hpp"

namespace fs = std::filesystem;
using namespace tfus;

namespace {

// Builds every fixture with python/struct so the byte layout is authored
// independently of the reader under test.
fs::path make_fixtures() {
  static fs::path dir;
  if (!dir.empty()) return dir;
  dir = oracle::temp_dir("nifti");
  const std::string d = dir.string();
  const int rc = oracle::run_python(
      "import numpy as np, struct, gzip\n"
      "d = r'" + d + "'\n"
      "def header(dims, pixdim, datatype, bitpix, qoffset=(0, 0, 0), slope=0.0,\n"
      "           inter=0.0, magic=b'n+1\\x00', sizeof=348, ndim=3, dim4=1, endian='<'):\n"
      "    h = bytearray(348)\n"
      "    struct.pack_into(endian + 'i', h, 0, sizeof)\n"
      "    struct.pack_into('<8h', h, 40, ndim, dims[0], dims[1], dims[2], dim4, 1, 1, 1)\n"
      "    struct.pack_into('<h', h, 70, datatype)\n"
      "    struct.pack_into('<h', h, 72, bitpix)\n"
      "    struct.pack_into('<8f', h, 76, 0, pixdim[0], pixdim[1], pixdim[2], 0, 0, 0, 0)\n"
      "    struct.pack_into('<f', h, 108, 352.0)\n"
      "    struct.pack_into('<f', h, 112, slope)\n"
      "    struct.pack_into('<f', h, 116, inter)\n"
      "    struct.pack_into('<3f', h, 268, *qoffset)\n"
      "    h[344:348] = magic\n"
      "    return bytes(h) + b'\\x00' * 4\n"
      "vals = np.arange(24, dtype=np.int16)\n"
      "body = header((4, 3, 2), (0.5, 0.75, 1.25), 4, 16, (1, 2, 3)) + vals.tobytes()\n"
      "open(d + '/a.nii', 'wb').write(body)\n"
      "gzip.open(d + '/a.nii.gz', 'wb').write(body)\n"
      "open(d + '/scaled.nii', 'wb').write(\n"
      "    header((2, 2, 2), (1, 1, 1), 4, 16, slope=2.0, inter=-1000.0)\n"
      "    + np.arange(8, dtype=np.int16).tobytes())\n"
      "for name, code, arr in [\n"
      "    ('u8', 2, np.arange(8, dtype=np.uint8)),\n"
      "    ('i32', 8, np.arange(8, dtype=np.int32)),\n"
      "    ('f32', 16, np.arange(8, dtype=np.float32) * 0.5),\n"
      "    ('f64', 64, np.arange(8, dtype=np.float64) * 0.25)]:\n"
      "    open(d + '/%s.nii' % name, 'wb').write(\n"
      "        header((2, 2, 2), (1, 1, 1), code, arr.itemsize * 8) + arr.tobytes())\n"
      "open(d + '/fourd.nii', 'wb').write(\n"
      "    header((2, 2, 2), (1, 1, 1), 4, 16, ndim=4, dim4=2)\n"
      "    + np.zeros(16, dtype=np.int16).tobytes())\n"
      "open(d + '/complex.nii', 'wb').write(\n"
      "    header((2, 2, 2), (1, 1, 1), 32, 64) + b'\\x00' * 64)\n"
      "open(d + '/pair_magic.nii', 'wb').write(\n"
      "    header((2, 2, 2), (1, 1, 1), 4, 16, magic=b'ni1\\x00')\n"
      "    + np.zeros(8, dtype=np.int16).tobytes())\n"
      "open(d + '/bigendian.nii', 'wb').write(\n"
      "    header((2, 2, 2), (1, 1, 1), 4, 16, endian='>')\n"
      "    + np.zeros(8, dtype=np.int16).tobytes())\n"
      "open(d + '/short.nii', 'wb').write(\n"
      "    header((4, 4, 4), (1, 1, 1), 4, 16) + b'\\x00' * 10)\n"
      "nan = np.zeros(8, dtype=np.float32); nan[3] = np.nan\n"
      "open(d + '/nan.nii', 'wb').write(header((2, 2, 2), (1, 1, 1), 16, 32) + nan.tobytes())\n");
  REQUIRE(rc == 0);
  return dir;
}

}  // namespace

TEST_CASE("nifti: reads geometry, values, and units from a plain .nii") {
  const auto dir = make_fixtures();
  const auto vol = read_nifti(dir / "a.nii");
  CHECK(vol.grid.dims == Index3{4, 3, 2});
  CHECK(vol.grid.spacing[0] == doctest::Approx(0.5));
  CHECK(vol.grid.spacing[1] == doctest::Approx(0.75));
  CHECK(vol.grid.spacing[2] == doctest::Approx(1.25));
  CHECK(vol.grid.origin[0] == doctest::Approx(1.0));
  CHECK(vol.grid.origin[1] == doctest::Approx(2.0));
  CHECK(vol.grid.origin[2] == doctest::Approx(3.0));
  CHECK(vol.units == Unit::HU);
  // file order is x-fastest: value at (i,j,k) is i + nx*(j + ny*k)
  CHECK(vol.at(0, 0, 0) == 0.0f);
  CHECK(vol.at(1, 2, 0) == 9.0f);
  CHECK(vol.at(3, 2, 1) == 23.0f);

  const auto as_density = read_nifti(dir / "a.nii", Unit::Density);
  CHECK(as_density.units == Unit::Density);
}

TEST_CASE("nifti: .nii.gz decodes to the same volume") {
  const auto dir = make_fixtures();
  const auto plain = read_nifti(dir / "a.nii");
  const auto gz = read_nifti(dir / "a.nii.gz");
  CHECK(gz.grid == plain.grid);
  CHECK(gz.values == plain.values);
}

TEST_CASE("nifti: scl_slope / scl_inter rescaling is applied") {
  const auto dir = make_fixtures();
  const auto vol = read_nifti(dir / "scaled.nii");
  CHECK(vol.at(0, 0, 0) == doctest::Approx(-1000.0));   // 0*2 - 1000
  CHECK(vol.at(1, 1, 1) == doctest::Approx(-986.0));    // 7*2 - 1000
}

TEST_CASE("nifti: all supported datatypes convert to float") {
  const auto dir = make_fixtures();
  CHECK(read_nifti(dir / "u8.nii").at(1, 1, 1) == 7.0f);
  CHECK(read_nifti(dir / "i32.nii").at(1, 1, 1) == 7.0f);
  CHECK(read_nifti(dir / "f32.nii").at(1, 1, 1) == doctest::Approx(3.5));
  CHECK(read_nifti(dir / "f64.nii").at(1, 1, 1) == doctest::Approx(1.75));
}

TEST_CASE("nifti: malformed files are rejected with specific errors") {
  const auto dir = make_fixtures();
  CHECK_THROWS_AS(read_nifti(dir / "fourd.nii"), FormatError);
  CHECK_THROWS_AS(read_nifti(dir / "complex.nii"), FormatError);
  CHECK_THROWS_AS(read_nifti(dir / "pair_magic.nii"), FormatError);
  CHECK_THROWS_AS(read_nifti(dir / "short.nii"), FormatError);
  CHECK_THROWS_AS(read_nifti(dir / "nan.nii"), FormatError);
  CHECK_THROWS_AS(read_nifti(dir / "no_such.nii"), IoError);
  try {
    read_nifti(dir / "bigendian.nii");
    FAIL("big-endian file was accepted");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("big-endian") != std::string::npos);
  }
}
