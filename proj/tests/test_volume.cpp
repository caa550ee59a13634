// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include <cmath>
#include <filesystem>

#include "oracles.hpp"
#include "tfus/npy.hpp"
#include "tfus/types.hpp"
#include "tfus/volume.hpp"

namespace fs = std::filesystem;
using namespace tfus;

namespace {

GridSpec cube(int n, double spacing = 1.0) {
  GridSpec g;
  g.dims = {n, n, n};
  g.spacing = {spacing, spacing, spacing};
  return g;
}

}  // namespace

TEST_CASE("volume: skull phantom shell geometry") {
  const auto vol = make_skull_phantom(cube(32), 10.0, 3.0, 1700.0f);
  CHECK(vol.units == Unit::HU);
  // shell spans [7, 10] mm from the center voxel (16,16,16)
  CHECK(vol.at(16, 16, 16) == 0.0f);
  CHECK(vol.at(22, 16, 16) == 0.0f);    // r = 6, inside the hollow
  CHECK(vol.at(24, 16, 16) == 1700.0f); // r = 8
  CHECK(vol.at(16, 16, 26) == 1700.0f); // r = 10, boundary inclusive
  CHECK(vol.at(27, 16, 16) == 0.0f);    // r = 11, outside

  std::size_t count = 0;
  for (float v : vol.values) count += (v != 0.0f);
  CHECK(count == 2804);  // voxelized [7,10] shell; analytic volume is 2752 mm^3

  // mirror symmetry about the center voxel
  for (int d = 1; d <= 10; ++d) {
    CHECK(vol.at(16 + d, 16, 16) == vol.at(16 - d, 16, 16));
    CHECK(vol.at(16, 16 + d, 16) == vol.at(16, 16, 16 - d));
  }
}

TEST_CASE("volume: skull phantom rejects bad geometry") {
  CHECK_THROWS_AS(make_skull_phantom(cube(32), 10.0, 0.0, 1700.0f), ArgumentError);
  CHECK_THROWS_AS(make_skull_phantom(cube(32), 10.0, 10.0, 1700.0f), ArgumentError);
  CHECK_THROWS_AS(make_skull_phantom(cube(32), 15.5, 3.0, 1700.0f), ArgumentError);
  CHECK_NOTHROW(make_skull_phantom(cube(32), 15.0, 3.0, 1700.0f));
}

TEST_CASE("volume: minmax_normalize maps range to [0,1]") {
  ScalarField3D f(GridSpec{{4, 1, 1}, {1, 1, 1}, {0, 0, 0}}, Unit::HU);
  f.values = {-5.0f, 0.0f, 5.0f, 15.0f};
  const auto n = minmax_normalize(f);
  CHECK(n.units == Unit::Dimensionless);
  CHECK(n.values[0] == doctest::Approx(0.0));
  CHECK(n.values[1] == doctest::Approx(0.25));
  CHECK(n.values[2] == doctest::Approx(0.5));
  CHECK(n.values[3] == doctest::Approx(1.0));

  ScalarField3D flat(cube(2), Unit::HU, 7.0f);
  const auto z = minmax_normalize(flat);
  for (float v : z.values) CHECK(v == 0.0f);
}

TEST_CASE("volume: log_compress is log1p and rejects negatives") {
  ScalarField3D f(GridSpec{{3, 1, 1}, {1, 1, 1}, {0, 0, 0}}, Unit::Pressure);
  f.values = {0.0f, static_cast<float>(std::exp(1.0) - 1.0), static_cast<float>(std::exp(2.0) - 1.0)};
  const auto g = log_compress(f);
  CHECK(g.values[0] == doctest::Approx(0.0));
  CHECK(g.values[1] == doctest::Approx(1.0));
  CHECK(g.values[2] == doctest::Approx(2.0));

  f.values[1] = -0.5f;
  CHECK_THROWS_AS(log_compress(f), ArgumentError);
}

TEST_CASE("volume: resample_isotropic is identity at matching spacing") {
  ScalarField3D f(cube(8, 0.5), Unit::HU);
  for (std::size_t n = 0; n < f.values.size(); ++n) f.values[n] = static_cast<float>(n);
  const auto r = resample_isotropic(f, 0.5);
  CHECK(r.grid == f.grid);
  CHECK(r.values == f.values);
}

TEST_CASE("volume: resample_isotropic reproduces linear fields exactly") {
  // trilinear interpolation is exact on fields linear in world coordinates
  GridSpec g;
  g.dims = {9, 7, 5};
  g.spacing = {1.0, 2.0, 4.0};
  ScalarField3D f(g, Unit::HU);
  for (int k = 0; k < g.dims[2]; ++k)
    for (int j = 0; j < g.dims[1]; ++j)
      for (int i = 0; i < g.dims[0]; ++i) {
        const Vec3 w = g.voxel_center(i, j, k);
        f.at(i, j, k) = static_cast<float>(w[0] + 10.0 * w[1] + 100.0 * w[2]);
      }
  const auto r = resample_isotropic(f, 1.0);
  CHECK(r.grid.dims == Index3{9, 13, 17});  // floor(extent/h)+1 per axis
  CHECK(r.grid.isotropic());
  for (int k = 0; k < r.grid.dims[2]; ++k)
    for (int j = 0; j < r.grid.dims[1]; ++j)
      for (int i = 0; i < r.grid.dims[0]; ++i) {
        CHECK(r.at(i, j, k) == doctest::Approx(i + 10.0 * j + 100.0 * k).epsilon(1e-5));
      }

  CHECK_THROWS_AS(resample_isotropic(f, 0.0), ArgumentError);
}

TEST_CASE("volume: npz archive round-trip preserves grid and values") {
  const auto dir = oracle::temp_dir("vol_npz");
  auto vol = make_skull_phantom(cube(16), 5.0, 2.0, 1700.0f);
  vol.grid.spacing = {0.5, 0.5, 0.5};
  vol.grid.origin = {-4.0, -4.0, -4.0};
  write_volume_npz(dir / "v.npz", vol);
  const auto back = read_volume_npz(dir / "v.npz", Unit::HU);
  CHECK(back.grid == vol.grid);
  CHECK(back.values == vol.values);
  CHECK(back.units == Unit::HU);
  fs::remove_all(dir);
}

TEST_CASE("volume: npz layout matches the numpy convention") {
  const auto dir = oracle::temp_dir("vol_np");
  GridSpec g;
  g.dims = {4, 3, 2};
  g.spacing = {0.5, 0.75, 1.0};
  g.origin = {1.0, 2.0, 3.0};
  ScalarField3D f(g, Unit::HU);
  for (std::size_t n = 0; n < f.values.size(); ++n) f.values[n] = static_cast<float>(n);
  write_volume_npz(dir / "v.npz", f);

  // shape must be (nz, ny, nx) with x fastest: ct[k, j, i] == at(i, j, k)
  const int rc = oracle::run_python(
      "import numpy as np\n"
      "z = np.load(r'" + (dir / "v.npz").string() + "')\n"
      "ct = z['ct']\n"
      "assert ct.dtype == np.float32 and ct.shape == (2, 3, 4)\n"
      "assert ct[0, 0, 1] == 1 and ct[0, 1, 0] == 4 and ct[1, 0, 0] == 12\n"
      "assert np.array_equal(z['spacing'], [0.5, 0.75, 1.0])\n"
      "assert np.array_equal(z['origin'], [1.0, 2.0, 3.0])\n");
  CHECK(rc == 0);
  fs::remove_all(dir);
}

TEST_CASE("volume: reads numpy-authored archives including int16 ct") {
  const auto dir = oracle::temp_dir("vol_i2");
  const int rc = oracle::run_python(
      "import numpy as np\n"
      "d = r'" + dir.string() + "'\n"
      "ct = np.arange(24, dtype=np.int16).reshape(2, 3, 4)\n"
      "np.savez(d + '/i2.npz', ct=ct, spacing=np.array([1.0, 1.0, 1.0]),\n"
      "         origin=np.zeros(3))\n"
      "np.savez(d + '/noct.npz', foo=np.zeros(3))\n"
      "bad = np.zeros((2, 2, 2), dtype=np.float32); bad[0, 0, 0] = np.nan\n"
      "np.savez(d + '/nan.npz', ct=bad, spacing=np.ones(3), origin=np.zeros(3))\n");
  REQUIRE(rc == 0);

  const auto vol = read_volume_npz(dir / "i2.npz");
  CHECK(vol.grid.dims == Index3{4, 3, 2});
  CHECK(vol.at(1, 0, 0) == 1.0f);
  CHECK(vol.at(0, 1, 0) == 4.0f);
  CHECK(vol.at(0, 0, 1) == 12.0f);

  CHECK_THROWS_AS(read_volume_npz(dir / "noct.npz"), FormatError);
  CHECK_THROWS_AS(read_volume_npz(dir / "nan.npz"), FormatError);
  fs::remove_all(dir);
}

TEST_CASE("volume: read_volume dispatches on extension") {
  const auto dir = oracle::temp_dir("vol_ext");
  const auto vol = make_skull_phantom(cube(12), 4.0, 1.5, 1000.0f);
  write_volume_npz(dir / "v.npz", vol);
  CHECK(read_volume(dir / "v.npz").values == vol.values);
  CHECK_THROWS_AS(read_volume(dir / "v.raw"), ArgumentError);
  fs::remove_all(dir);
}
