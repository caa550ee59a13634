// SPDX-License-Identifier: Apache-2.0
//
// Minimal npy (v1.0) and npz reader/writer. Arrays are little-endian and
// C-contiguous; npz entries may be stored or deflated. Writes are atomic
// (temp file + rename) so an interrupted run never leaves a partial archive.

#pragma once

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tfus::npy {

enum class Dtype { u1, i1, u2, i2, u4, i4, u8, i8, f4, f8 };

std::size_t dtype_size(Dtype d);
// numpy descr string, e.g. "<f4" ("|u1" and "|i1" for the byte types).
std::string dtype_descr(Dtype d);
Dtype dtype_from_descr(const std::string& descr);

template <typename T> struct dtype_of;
template <> struct dtype_of<std::uint8_t> { static constexpr Dtype value = Dtype::u1; };
template <> struct dtype_of<std::int8_t> { static constexpr Dtype value = Dtype::i1; };
template <> struct dtype_of<std::uint16_t> { static constexpr Dtype value = Dtype::u2; };
template <> struct dtype_of<std::int16_t> { static constexpr Dtype value = Dtype::i2; };
template <> struct dtype_of<std::uint32_t> { static constexpr Dtype value = Dtype::u4; };
template <> struct dtype_of<std::int32_t> { static constexpr Dtype value = Dtype::i4; };
template <> struct dtype_of<std::uint64_t> { static constexpr Dtype value = Dtype::u8; };
template <> struct dtype_of<std::int64_t> { static constexpr Dtype value = Dtype::i8; };
template <> struct dtype_of<float> { static constexpr Dtype value = Dtype::f4; };
template <> struct dtype_of<double> { static constexpr Dtype value = Dtype::f8; };

struct Array {
  Dtype dtype = Dtype::f4;
  std::vector<std::size_t> shape;
  std::vector<unsigned char> data;  // raw bytes, C order

  std::size_t element_count() const;
  void validate() const;  // data size == product(shape) * dtype_size

  template <typename T>
  static Array from(const std::vector<std::size_t>& shape, const std::vector<T>& values) {
    Array a;
    a.dtype = dtype_of<T>::value;
    a.shape = shape;
    a.data.resize(values.size() * sizeof(T));
    if (!values.empty()) std::memcpy(a.data.data(), values.data(), a.data.size());
    a.validate();
    return a;
  }

  template <typename T>
  std::vector<T> as() const {
    if (dtype != dtype_of<T>::value) {
      throw std::invalid_argument("npy array dtype mismatch: stored " + dtype_descr(dtype));
    }
    std::vector<T> out(element_count());
    if (!out.empty()) std::memcpy(out.data(), data.data(), data.size());
    return out;
  }
};

// In-memory npy encode/decode.
std::vector<unsigned char> encode(const Array& a);
Array decode(const unsigned char* bytes, std::size_t size);

void write_npy(const std::filesystem::path& path, const Array& a);
Array read_npy(const std::filesystem::path& path);

// npz: named members in a ZIP container. Order is preserved on read.
using Entries = std::vector<std::pair<std::string, Array>>;

// compress=false keeps members stored (fast, byte-transparent); dataset export
// passes true for deflated members. The reader accepts both.
void write_npz(const std::filesystem::path& path, const Entries& entries, bool compress = false);
Entries read_npz(const std::filesystem::path& path);

// Sibling-temp-file + rename write, shared by the npy/npz writers and the
// pipeline's sidecar outputs.
void write_file_atomic(const std::filesystem::path& path, const std::vector<unsigned char>& bytes);

}  // namespace tfus::npy
