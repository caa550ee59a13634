// SPDX-License-Identifier: Apache-2.0

#include "tfus/npy.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include "tfus/types.hpp"

namespace tfus::npy {
namespace {

constexpr unsigned char kMagic[6] = {0x93, 'N', 'U', 'M', 'P', 'Y'};

void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
}
void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}
std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::vector<unsigned char> deflate_raw(const std::vector<unsigned char>& in) {
  z_stream strm{};
  if (deflateInit2(&strm, Z_DEFAULT_COMPRESSION, Z_DEFLATED, -15, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
    throw IoError("deflateInit2 failed");
  }
  std::vector<unsigned char> out(deflateBound(&strm, static_cast<uLong>(in.size())));
  strm.next_in = const_cast<Bytef*>(in.data());
  strm.avail_in = static_cast<uInt>(in.size());
  strm.next_out = out.data();
  strm.avail_out = static_cast<uInt>(out.size());
  const int rc = deflate(&strm, Z_FINISH);
  deflateEnd(&strm);
  if (rc != Z_STREAM_END) throw IoError("deflate failed");
  out.resize(out.size() - strm.avail_out);
  return out;
}

std::vector<unsigned char> inflate_raw(const unsigned char* in, std::size_t in_size,
                                       std::size_t out_size) {
  z_stream strm{};
  if (inflateInit2(&strm, -15) != Z_OK) throw IoError("inflateInit2 failed");
  std::vector<unsigned char> out(out_size);
  strm.next_in = const_cast<Bytef*>(in);
  strm.avail_in = static_cast<uInt>(in_size);
  strm.next_out = out.data();
  strm.avail_out = static_cast<uInt>(out.size());
  const int rc = inflate(&strm, Z_FINISH);
  inflateEnd(&strm);
  if (rc != Z_STREAM_END || strm.avail_out != 0) {
    throw FormatError("zip member failed to inflate to declared size");
  }
  return out;
}

std::uint32_t crc32_of(const std::vector<unsigned char>& bytes) {
  uLong c = crc32(0L, Z_NULL, 0);
  c = crc32(c, bytes.data(), static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(c);
}

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  f.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(f.tellg());
  f.seekg(0, std::ios::beg);
  std::vector<unsigned char> bytes(size);
  if (size > 0) f.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size));
  if (!f) throw IoError("short read on " + path.string());
  return bytes;
}

}  // namespace

// Write to a sibling temp file first so a crash never leaves a truncated
// archive under the final name.
void write_file_atomic(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
  std::random_device rd;
  std::ostringstream tmp_name;
  tmp_name << path.filename().string() << ".tmp" << std::hex << rd();
  const std::filesystem::path tmp = path.parent_path() / tmp_name.str();
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot create " + tmp.string());
    if (!bytes.empty()) {
      f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    }
    f.flush();
    if (!f) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw IoError("write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("rename to " + path.string() + " failed");
  }
}

namespace {

// Header dict parsing. The grammar numpy emits is fixed enough that a small
// hand parser is safer than dragging in a python-literal library.
std::string find_dict_value(const std::string& dict, const std::string& key) {
  const std::string quoted = "'" + key + "'";
  const auto kpos = dict.find(quoted);
  if (kpos == std::string::npos) throw FormatError("npy header missing key " + key);
  auto pos = dict.find(':', kpos + quoted.size());
  if (pos == std::string::npos) throw FormatError("npy header malformed at key " + key);
  ++pos;
  while (pos < dict.size() && dict[pos] == ' ') ++pos;
  if (pos >= dict.size()) throw FormatError("npy header truncated at key " + key);
  if (dict[pos] == '\'') {
    const auto end = dict.find('\'', pos + 1);
    if (end == std::string::npos) throw FormatError("npy header unterminated string");
    return dict.substr(pos + 1, end - pos - 1);
  }
  if (dict[pos] == '(') {
    const auto end = dict.find(')', pos);
    if (end == std::string::npos) throw FormatError("npy header unterminated tuple");
    return dict.substr(pos, end - pos + 1);
  }
  auto end = dict.find_first_of(",}", pos);
  if (end == std::string::npos) throw FormatError("npy header malformed value for " + key);
  auto value = dict.substr(pos, end - pos);
  while (!value.empty() && value.back() == ' ') value.pop_back();
  return value;
}

std::vector<std::size_t> parse_shape(const std::string& tuple) {
  if (tuple.size() < 2 || tuple.front() != '(' || tuple.back() != ')') {
    throw FormatError("npy shape is not a tuple: " + tuple);
  }
  std::vector<std::size_t> shape;
  std::string body = tuple.substr(1, tuple.size() - 2);
  std::istringstream is(body);
  std::string item;
  while (std::getline(is, item, ',')) {
    std::string digits;
    for (char c : item) {
      if (c >= '0' && c <= '9') digits.push_back(c);
      else if (c != ' ') throw FormatError("npy shape has non-integer entry: " + tuple);
    }
    if (!digits.empty()) shape.push_back(std::stoull(digits));
  }
  return shape;
}

constexpr std::uint32_t kLocalSig = 0x04034b50;
constexpr std::uint32_t kCentralSig = 0x02014b50;
constexpr std::uint32_t kEndSig = 0x06054b50;
// Fixed timestamp (1980-01-01) keeps archives byte-identical across runs.
constexpr std::uint16_t kDosTime = 0;
constexpr std::uint16_t kDosDate = 0x0021;

}  // namespace

std::size_t dtype_size(Dtype d) {
  switch (d) {
    case Dtype::u1: case Dtype::i1: return 1;
    case Dtype::u2: case Dtype::i2: return 2;
    case Dtype::u4: case Dtype::i4: case Dtype::f4: return 4;
    case Dtype::u8: case Dtype::i8: case Dtype::f8: return 8;
  }
  throw ArgumentError("unknown dtype");
}

std::string dtype_descr(Dtype d) {
  switch (d) {
    case Dtype::u1: return "|u1";
    case Dtype::i1: return "|i1";
    case Dtype::u2: return "<u2";
    case Dtype::i2: return "<i2";
    case Dtype::u4: return "<u4";
    case Dtype::i4: return "<i4";
    case Dtype::u8: return "<u8";
    case Dtype::i8: return "<i8";
    case Dtype::f4: return "<f4";
    case Dtype::f8: return "<f8";
  }
  throw ArgumentError("unknown dtype");
}

Dtype dtype_from_descr(const std::string& descr) {
  std::string d = descr;
  // single-byte types are endianness-free; accept any of |, <, = prefixes
  if (!d.empty() && (d[0] == '|' || d[0] == '<' || d[0] == '=')) {
    const bool single = d.size() == 3 && d[2] == '1';
    if (d[0] == '|' && !single) throw FormatError("unsupported npy descr: " + descr);
    d = d.substr(1);
  }
  if (d == "u1") return Dtype::u1;
  if (d == "i1") return Dtype::i1;
  if (d == "u2") return Dtype::u2;
  if (d == "i2") return Dtype::i2;
  if (d == "u4") return Dtype::u4;
  if (d == "i4") return Dtype::i4;
  if (d == "u8") return Dtype::u8;
  if (d == "i8") return Dtype::i8;
  if (d == "f4") return Dtype::f4;
  if (d == "f8") return Dtype::f8;
  throw FormatError("unsupported npy descr: " + descr);
}

std::size_t Array::element_count() const {
  std::size_t n = 1;
  for (std::size_t s : shape) n *= s;
  return n;
}

void Array::validate() const {
  if (data.size() != element_count() * dtype_size(dtype)) {
    throw ArgumentError("npy array data size does not match shape");
  }
}

std::vector<unsigned char> encode(const Array& a) {
  a.validate();
  std::ostringstream dict;
  dict << "{'descr': '" << dtype_descr(a.dtype) << "', 'fortran_order': False, 'shape': (";
  for (std::size_t i = 0; i < a.shape.size(); ++i) dict << a.shape[i] << (a.shape.size() == 1 ? "," : (i + 1 < a.shape.size() ? ", " : ""));
  dict << "), }";
  std::string header = dict.str();
  // magic(6) + version(2) + len(2) + dict + '\n', padded to a 64-byte multiple
  const std::size_t base = 6 + 2 + 2;
  std::size_t total = base + header.size() + 1;
  const std::size_t padded = (total + 63) / 64 * 64;
  header.append(padded - total, ' ');
  header.push_back('\n');
  if (header.size() > 0xffff) throw ArgumentError("npy header too large");

  // padded == 10 + header.size() after the padding append above
  std::vector<unsigned char> out(padded + a.data.size());
  std::memcpy(out.data(), kMagic, 6);
  out[6] = 0x01;
  out[7] = 0x00;
  out[8] = static_cast<unsigned char>(header.size() & 0xff);
  out[9] = static_cast<unsigned char>((header.size() >> 8) & 0xff);
  std::memcpy(out.data() + 10, header.data(), header.size());
  if (!a.data.empty()) {
    std::memcpy(out.data() + 10 + header.size(), a.data.data(), a.data.size());
  }
  return out;
}

Array decode(const unsigned char* bytes, std::size_t size) {
  if (size < 10 || !std::equal(kMagic, kMagic + 6, bytes)) {
    throw FormatError("not an npy file (bad magic)");
  }
  const int major = bytes[6];
  if (major != 1) throw FormatError("unsupported npy version " + std::to_string(major));
  const std::size_t header_len = get_u16(bytes + 8);
  if (10 + header_len > size) throw FormatError("npy header truncated");
  const std::string dict(reinterpret_cast<const char*>(bytes) + 10, header_len);

  Array a;
  a.dtype = dtype_from_descr(find_dict_value(dict, "descr"));
  const std::string fortran = find_dict_value(dict, "fortran_order");
  if (fortran != "False") throw FormatError("fortran-order npy arrays are not supported");
  a.shape = parse_shape(find_dict_value(dict, "shape"));

  const std::size_t payload = a.element_count() * dtype_size(a.dtype);
  if (10 + header_len + payload > size) throw FormatError("npy data truncated");
  a.data.assign(bytes + 10 + header_len, bytes + 10 + header_len + payload);
  return a;
}

void write_npy(const std::filesystem::path& path, const Array& a) {
  write_file_atomic(path, encode(a));
}

Array read_npy(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return decode(bytes.data(), bytes.size());
}

void write_npz(const std::filesystem::path& path, const Entries& entries, bool compress) {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    for (std::size_t j = i + 1; j < entries.size(); ++j) {
      if (entries[i].first == entries[j].first) {
        throw ArgumentError("duplicate npz member name: " + entries[i].first);
      }
    }
  }
  if (entries.size() > 0xffff) throw ArgumentError("too many npz members for zip format");

  std::vector<unsigned char> out;
  struct CentralRecord {
    std::string name;
    std::uint32_t crc, csize, usize, offset;
    std::uint16_t method;
  };
  std::vector<CentralRecord> central;

  for (const auto& [raw_name, array] : entries) {
    const std::string name = raw_name + ".npy";
    const auto payload = encode(array);
    const std::uint32_t crc = crc32_of(payload);
    std::vector<unsigned char> stored;
    std::uint16_t method = 0;
    const std::vector<unsigned char>* body = &payload;
    if (compress) {
      stored = deflate_raw(payload);
      if (stored.size() < payload.size()) {
        method = 8;
        body = &stored;
      }
    }
    if (payload.size() > 0xfffffffeull || body->size() > 0xfffffffeull ||
        out.size() > 0xfffffffeull) {
      throw ArgumentError("npz member exceeds 4 GiB zip limit");
    }
    CentralRecord rec{name, crc, static_cast<std::uint32_t>(body->size()),
                      static_cast<std::uint32_t>(payload.size()),
                      static_cast<std::uint32_t>(out.size()), method};
    central.push_back(rec);

    put_u32(out, kLocalSig);
    put_u16(out, 20);         // version needed
    put_u16(out, 0);          // flags
    put_u16(out, method);
    put_u16(out, kDosTime);
    put_u16(out, kDosDate);
    put_u32(out, rec.crc);
    put_u32(out, rec.csize);
    put_u32(out, rec.usize);
    put_u16(out, static_cast<std::uint16_t>(name.size()));
    put_u16(out, 0);          // extra length
    out.insert(out.end(), name.begin(), name.end());
    out.insert(out.end(), body->begin(), body->end());
  }

  const std::size_t cd_offset = out.size();
  for (const auto& rec : central) {
    put_u32(out, kCentralSig);
    put_u16(out, 20);  // version made by
    put_u16(out, 20);  // version needed
    put_u16(out, 0);
    put_u16(out, rec.method);
    put_u16(out, kDosTime);
    put_u16(out, kDosDate);
    put_u32(out, rec.crc);
    put_u32(out, rec.csize);
    put_u32(out, rec.usize);
    put_u16(out, static_cast<std::uint16_t>(rec.name.size()));
    put_u16(out, 0);  // extra
    put_u16(out, 0);  // comment
    put_u16(out, 0);  // disk number
    put_u16(out, 0);  // internal attrs
    put_u32(out, 0);  // external attrs
    put_u32(out, rec.offset);
    out.insert(out.end(), rec.name.begin(), rec.name.end());
  }
  const std::size_t cd_size = out.size() - cd_offset;
  if (out.size() > 0xfffffffeull) throw ArgumentError("npz archive exceeds 4 GiB zip limit");

  put_u32(out, kEndSig);
  put_u16(out, 0);
  put_u16(out, 0);
  put_u16(out, static_cast<std::uint16_t>(central.size()));
  put_u16(out, static_cast<std::uint16_t>(central.size()));
  put_u32(out, static_cast<std::uint32_t>(cd_size));
  put_u32(out, static_cast<std::uint32_t>(cd_offset));
  put_u16(out, 0);

  write_file_atomic(path, out);
}

Entries read_npz(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  if (bytes.size() < 22) throw FormatError("npz too small to be a zip archive");

  // locate end-of-central-directory; scan backwards to allow a zip comment
  std::size_t eocd = std::string::npos;
  const std::size_t scan_limit = bytes.size() >= 22 + 0xffff ? bytes.size() - 22 - 0xffff : 0;
  for (std::size_t pos = bytes.size() - 22; ; --pos) {
    if (get_u32(bytes.data() + pos) == kEndSig) {
      eocd = pos;
      break;
    }
    if (pos == scan_limit) break;
  }
  if (eocd == std::string::npos) throw FormatError("zip end-of-central-directory not found");

  const std::uint16_t count = get_u16(bytes.data() + eocd + 10);
  std::size_t pos = get_u32(bytes.data() + eocd + 16);

  Entries entries;
  for (std::uint16_t n = 0; n < count; ++n) {
    if (pos + 46 > bytes.size() || get_u32(bytes.data() + pos) != kCentralSig) {
      throw FormatError("zip central directory corrupt");
    }
    const std::uint16_t method = get_u16(bytes.data() + pos + 10);
    const std::uint32_t crc = get_u32(bytes.data() + pos + 16);
    const std::uint32_t csize = get_u32(bytes.data() + pos + 20);
    const std::uint32_t usize = get_u32(bytes.data() + pos + 24);
    const std::uint16_t name_len = get_u16(bytes.data() + pos + 28);
    const std::uint16_t extra_len = get_u16(bytes.data() + pos + 30);
    const std::uint16_t comment_len = get_u16(bytes.data() + pos + 32);
    const std::uint32_t local_offset = get_u32(bytes.data() + pos + 42);
    if (pos + 46 + name_len > bytes.size()) throw FormatError("zip name truncated");
    std::string name(reinterpret_cast<const char*>(bytes.data()) + pos + 46, name_len);
    pos += 46 + name_len + extra_len + comment_len;

    if (local_offset + 30 > bytes.size() || get_u32(bytes.data() + local_offset) != kLocalSig) {
      throw FormatError("zip local header corrupt for " + name);
    }
    const std::uint16_t lname = get_u16(bytes.data() + local_offset + 26);
    const std::uint16_t lextra = get_u16(bytes.data() + local_offset + 28);
    const std::size_t data_pos = local_offset + 30 + lname + lextra;
    if (data_pos + csize > bytes.size()) throw FormatError("zip member data truncated: " + name);

    std::vector<unsigned char> payload;
    if (method == 0) {
      if (csize != usize) throw FormatError("stored zip member has mismatched sizes: " + name);
      payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(data_pos),
                     bytes.begin() + static_cast<std::ptrdiff_t>(data_pos + csize));
    } else if (method == 8) {
      payload = inflate_raw(bytes.data() + data_pos, csize, usize);
    } else {
      throw FormatError("unsupported zip compression method " + std::to_string(method));
    }
    if (crc32_of(payload) != crc) throw FormatError("crc mismatch for zip member " + name);

    if (name.size() > 4 && name.substr(name.size() - 4) == ".npy") {
      name = name.substr(0, name.size() - 4);
    }
    for (const auto& [existing, _] : entries) {
      if (existing == name) throw FormatError("duplicate npz member name: " + name);
    }
    entries.emplace_back(name, decode(payload.data(), payload.size()));
  }
  return entries;
}

}  // namespace tfus::npy
