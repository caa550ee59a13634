// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "tfus/npy.hpp"
#include "tfus/types.hpp"

namespace fs = std::filesystem;
using namespace tfus;

namespace {

std::vector<float> iota_f(std::size_t n) {
  std::vector<float> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<float>(i);
  return v;
}

}  // namespace

TEST_CASE("npy: encoded byte layout is frozen") {
  const auto a = npy::Array::from<float>({2, 3}, iota_f(6));
  const auto bytes = npy::encode(a);

  // Independently reconstructed v1.0 stream: magic, version, little-endian
  // header length, space-padded dict ending in newline, then raw values.
  std::string dict = "{'descr': '<f4', 'fortran_order': False, 'shape': (2, 3), }";
  std::vector<unsigned char> expect = {0x93, 'N', 'U', 'M', 'P', 'Y', 1, 0};
  const std::size_t padded = (10 + dict.size() + 1 + 63) / 64 * 64;  // = 128
  dict.append(padded - 10 - dict.size() - 1, ' ');
  dict.push_back('\n');
  expect.push_back(static_cast<unsigned char>(dict.size() & 0xff));
  expect.push_back(static_cast<unsigned char>(dict.size() >> 8));
  expect.insert(expect.end(), dict.begin(), dict.end());
  for (int i = 0; i < 6; ++i) {
    const float f = static_cast<float>(i);
    unsigned char raw[4];
    std::memcpy(raw, &f, 4);
    expect.insert(expect.end(), raw, raw + 4);
  }

  CHECK(dict.size() == 118);
  CHECK(bytes.size() == 152);
  CHECK(bytes == expect);
}

TEST_CASE("npy: encode/decode round-trips every dtype") {
  auto check_roundtrip = [](auto tag) {
    using T = decltype(tag);
    std::vector<T> vals = {T(0), T(1), T(17), T(42)};
    const auto a = npy::Array::from<T>({4}, vals);
    const auto bytes = npy::encode(a);
    const auto b = npy::decode(bytes.data(), bytes.size());
    CHECK(b.dtype == a.dtype);
    CHECK(b.shape == std::vector<std::size_t>{4});
    CHECK(b.template as<T>() == vals);
  };
  check_roundtrip(std::uint8_t{});
  check_roundtrip(std::int8_t{});
  check_roundtrip(std::uint16_t{});
  check_roundtrip(std::int16_t{});
  check_roundtrip(std::uint32_t{});
  check_roundtrip(std::int32_t{});
  check_roundtrip(std::uint64_t{});
  check_roundtrip(std::int64_t{});
  check_roundtrip(float{});
  check_roundtrip(double{});
}

TEST_CASE("npy: one-dimensional and zero-dimensional shapes") {
  const auto a = npy::Array::from<double>({5}, {0, 1, 2, 3, 4});
  const auto abytes = npy::encode(a);
  const std::string header(abytes.begin() + 10, abytes.begin() + 10 + 118);
  CHECK(header.find("'shape': (5,)") != std::string::npos);
  const auto a2 = npy::decode(abytes.data(), abytes.size());
  CHECK(a2.shape == std::vector<std::size_t>{5});

  const auto s = npy::Array::from<float>({}, {3.5f});
  const auto sbytes = npy::encode(s);
  const auto s2 = npy::decode(sbytes.data(), sbytes.size());
  CHECK(s2.shape.empty());
  CHECK(s2.as<float>() == std::vector<float>{3.5f});
}

TEST_CASE("npy: as<T> rejects a mismatched dtype") {
  const auto a = npy::Array::from<float>({2}, {1.0f, 2.0f});
  CHECK_THROWS_AS((void)a.as<double>(), std::invalid_argument);
}

TEST_CASE("npy: decode rejects corrupt streams") {
  const auto good = npy::encode(npy::Array::from<float>({2, 3}, iota_f(6)));

  auto bad_magic = good;
  bad_magic[0] = 'P';
  CHECK_THROWS_AS(npy::decode(bad_magic.data(), bad_magic.size()), FormatError);

  auto bad_version = good;
  bad_version[6] = 3;
  CHECK_THROWS_AS(npy::decode(bad_version.data(), bad_version.size()), FormatError);

  CHECK_THROWS_AS(npy::decode(good.data(), 8), FormatError);            // header cut
  CHECK_THROWS_AS(npy::decode(good.data(), good.size() - 4), FormatError);  // data cut

  auto fortran = good;
  const std::string as_str(fortran.begin(), fortran.end());
  const auto pos = as_str.find("'fortran_order': False");
  REQUIRE(pos != std::string::npos);
  const std::string repl = "'fortran_order': True ";  // same length
  std::memcpy(fortran.data() + pos, repl.data(), repl.size());
  CHECK_THROWS_AS(npy::decode(fortran.data(), fortran.size()), FormatError);
}

TEST_CASE("npy: file round-trip and missing-file error") {
  const auto dir = oracle::temp_dir("npy_file");
  const auto a = npy::Array::from<std::int32_t>({3, 2}, {1, 2, 3, 4, 5, 6});
  npy::write_npy(dir / "a.npy", a);
  const auto b = npy::read_npy(dir / "a.npy");
  CHECK(b.as<std::int32_t>() == a.as<std::int32_t>());
  CHECK(b.shape == a.shape);
  CHECK_THROWS_AS(npy::read_npy(dir / "missing.npy"), IoError);
  fs::remove_all(dir);
}

TEST_CASE("npy: write_file_atomic overwrites and leaves no temp files") {
  const auto dir = oracle::temp_dir("npy_atomic");
  const fs::path p = dir / "blob.bin";
  npy::write_file_atomic(p, {1, 2, 3});
  npy::write_file_atomic(p, {9, 9});
  CHECK(fs::file_size(p) == 2);
  int n_files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++n_files;
  CHECK(n_files == 1);
  fs::remove_all(dir);
}

TEST_CASE("npz: stored and deflated archives round-trip with order preserved") {
  const auto dir = oracle::temp_dir("npz_rt");
  std::mt19937_64 rng(7);
  std::vector<float> big(32 * 32 * 32);
  for (auto& v : big) v = static_cast<float>(rng() % 1000) / 999.0f;

  npy::Entries entries;
  entries.emplace_back("pressure", npy::Array::from<float>({32, 32, 32}, big));
  entries.emplace_back("spacing", npy::Array::from<double>({3}, {0.5, 0.5, 0.5}));
  entries.emplace_back("count", npy::Array::from<std::int64_t>({1}, {42}));

  for (const bool compress : {false, true}) {
    CAPTURE(compress);
    const auto path = dir / (compress ? "c.npz" : "s.npz");
    npy::write_npz(path, entries, compress);
    const auto back = npy::read_npz(path);
    REQUIRE(back.size() == 3);
    CHECK(back[0].first == "pressure");
    CHECK(back[1].first == "spacing");
    CHECK(back[2].first == "count");
    CHECK(back[0].second.as<float>() == big);
    CHECK(back[1].second.as<double>() == std::vector<double>{0.5, 0.5, 0.5});
    CHECK(back[2].second.as<std::int64_t>() == std::vector<std::int64_t>{42});
  }
  // deflate should actually shrink this compressible payload
  CHECK(fs::file_size(dir / "c.npz") < fs::file_size(dir / "s.npz"));
  fs::remove_all(dir);
}

TEST_CASE("npz: duplicate member names are rejected on write") {
  npy::Entries entries;
  entries.emplace_back("a", npy::Array::from<float>({1}, {1.0f}));
  entries.emplace_back("a", npy::Array::from<float>({1}, {2.0f}));
  CHECK_THROWS_AS(npy::write_npz("/tmp/never_written.npz", entries), ArgumentError);
}

TEST_CASE("npz: corrupt archives are rejected") {
  const auto dir = oracle::temp_dir("npz_bad");
  npy::Entries entries;
  entries.emplace_back("a", npy::Array::from<float>({4}, iota_f(4)));
  npy::write_npz(dir / "ok.npz", entries, true);

  // flip one payload byte: crc must catch it
  std::vector<unsigned char> bytes;
  {
    std::ifstream f(dir / "ok.npz", std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(f), {});
  }
  bytes[40] ^= 0x5a;
  npy::write_file_atomic(dir / "flip.npz", bytes);
  CHECK_THROWS_AS(npy::read_npz(dir / "flip.npz"), FormatError);

  npy::write_file_atomic(dir / "tiny.npz", {1, 2, 3});
  CHECK_THROWS_AS(npy::read_npz(dir / "tiny.npz"), FormatError);
  fs::remove_all(dir);
}

TEST_CASE("npy/npz: interoperates with numpy in both directions") {
  const auto dir = oracle::temp_dir("npy_interop");
  const std::string d = dir.string();

  npy::write_npy(dir / "ours.npy", npy::Array::from<float>({2, 3}, iota_f(6)));
  npy::Entries entries;
  entries.emplace_back("x", npy::Array::from<double>({4}, {0.0, 0.25, 0.5, 0.75}));
  entries.emplace_back("n", npy::Array::from<std::int32_t>({2, 2}, {1, 2, 3, 4}));
  npy::write_npz(dir / "ours.npz", entries, true);

  const int rc = oracle::run_python(
      "import numpy as np\n"
      "d = r'" + d + "'\n"
      "a = np.load(d + '/ours.npy')\n"
      "assert a.dtype == np.float32 and a.shape == (2, 3)\n"
      "assert np.array_equal(a, np.arange(6, dtype=np.float32).reshape(2, 3))\n"
      "z = np.load(d + '/ours.npz')\n"
      "assert set(z.files) == {'x', 'n'}\n"
      "assert np.array_equal(z['x'], np.array([0.0, 0.25, 0.5, 0.75]))\n"
      "assert z['n'].dtype == np.int32 and np.array_equal(z['n'], [[1, 2], [3, 4]])\n"
      "np.save(d + '/theirs.npy', np.linspace(0.0, 1.0, 11))\n"
      "np.savez(d + '/theirs.npz', p=np.float32([[1, 2], [3, 4]]))\n"
      "np.savez_compressed(d + '/theirs_c.npz', q=np.arange(100, dtype=np.int64))\n");
  REQUIRE(rc == 0);

  const auto theirs = npy::read_npy(dir / "theirs.npy");
  CHECK(theirs.dtype == npy::Dtype::f8);
  REQUIRE(theirs.shape == std::vector<std::size_t>{11});
  const auto vals = theirs.as<double>();
  CHECK(vals.front() == doctest::Approx(0.0));
  CHECK(vals[5] == doctest::Approx(0.5));
  CHECK(vals.back() == doctest::Approx(1.0));

  const auto znpz = npy::read_npz(dir / "theirs.npz");
  REQUIRE(znpz.size() == 1);
  CHECK(znpz[0].first == "p");
  CHECK(znpz[0].second.as<float>() == std::vector<float>{1, 2, 3, 4});

  const auto znpz_c = npy::read_npz(dir / "theirs_c.npz");
  REQUIRE(znpz_c.size() == 1);
  CHECK(znpz_c[0].first == "q");
  const auto q = znpz_c[0].second.as<std::int64_t>();
  REQUIRE(q.size() == 100);
  CHECK(q[99] == 99);
  fs::remove_all(dir);
}
