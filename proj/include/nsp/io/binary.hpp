#pragma once

// Little-endian primitives for the NSPB/NSPW binary formats.

#include <array>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nsp::io {

void write_magic(std::ostream& out, std::string_view magic);
void write_u32(std::ostream& out, std::uint32_t v);
void write_u64(std::ostream& out, std::uint64_t v);
void write_f64(std::ostream& out, double v);
void write_f64s(std::ostream& out, std::span<const double> values);
void write_string(std::ostream& out, std::string_view s);  // u32 length + bytes

/// Each reader throws FormatError naming `what` on a short read.
void expect_magic(std::istream& in, std::string_view magic, std::string_view what);
std::uint32_t read_u32(std::istream& in, std::string_view what);
std::uint64_t read_u64(std::istream& in, std::string_view what);
double read_f64(std::istream& in, std::string_view what);
std::vector<double> read_f64s(std::istream& in, std::size_t count, std::string_view what);
std::string read_string(std::istream& in, std::string_view what, std::size_t max_length = 1 << 16);

}  // namespace nsp::io
