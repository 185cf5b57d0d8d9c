#include "nsp/io/binary.hpp"

#include <algorithm>
#include <bit>

#include "nsp/error.hpp"

namespace nsp::io {
namespace {

template <class T>
void put_le(std::ostream& out, T v) {
  std::array<char, sizeof(T)> bytes;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  }
  out.write(bytes.data(), bytes.size());
}

template <class T>
T get_le(std::istream& in, std::string_view what) {
  std::array<unsigned char, sizeof(T)> bytes;
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) {
    throw FormatError(std::string(what) + ": unexpected end of file");
  }
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(bytes[i]) << (8 * i);
  return v;
}

}  // namespace

void write_magic(std::ostream& out, std::string_view magic) {
  out.write(magic.data(), static_cast<std::streamsize>(magic.size()));
}

void write_u32(std::ostream& out, std::uint32_t v) { put_le(out, v); }
void write_u64(std::ostream& out, std::uint64_t v) { put_le(out, v); }
void write_f64(std::ostream& out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }

void write_f64s(std::ostream& out, std::span<const double> values) {
  for (double v : values) write_f64(out, v);
}

void write_string(std::ostream& out, std::string_view s) {
  write_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void expect_magic(std::istream& in, std::string_view magic, std::string_view what) {
  std::string got(magic.size(), '\0');
  if (!in.read(got.data(), static_cast<std::streamsize>(got.size())) || got != magic) {
    throw FormatError(std::string(what) + ": bad magic, expected \"" + std::string(magic) + "\"");
  }
}

std::uint32_t read_u32(std::istream& in, std::string_view what) {
  return get_le<std::uint32_t>(in, what);
}

std::uint64_t read_u64(std::istream& in, std::string_view what) {
  return get_le<std::uint64_t>(in, what);
}

double read_f64(std::istream& in, std::string_view what) {
  return std::bit_cast<double>(get_le<std::uint64_t>(in, what));
}

std::vector<double> read_f64s(std::istream& in, std::size_t count, std::string_view what) {
  std::vector<double> out;
  out.reserve(std::min<std::size_t>(count, std::size_t{1} << 20));
  for (std::size_t i = 0; i < count; ++i) out.push_back(read_f64(in, what));
  return out;
}

std::string read_string(std::istream& in, std::string_view what, std::size_t max_length) {
  const std::uint32_t n = read_u32(in, what);
  if (n > max_length) throw FormatError(std::string(what) + ": string length " + std::to_string(n) + " too large");
  std::string s(n, '\0');
  if (!in.read(s.data(), n)) throw FormatError(std::string(what) + ": unexpected end of file");
  return s;
}

}  // namespace nsp::io
