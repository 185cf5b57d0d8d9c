#include "nsp/io/nspw.hpp"

#include <fstream>

#include "nsp/error.hpp"
#include "nsp/io/binary.hpp"

namespace nsp::io {
namespace {

constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kMaxRank = 8;

std::uint64_t element_count(const Tensor& t, const std::string& what) {
  std::uint64_t n = 1;
  for (std::uint64_t d : t.shape) {
    if (d != 0 && n > UINT64_MAX / d) throw FormatError(what + ": tensor '" + t.name + "' too large");
    n *= d;
  }
  return n;
}

}  // namespace

void write_nspw(const std::filesystem::path& path, const std::vector<Tensor>& tensors) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write weight blob " + path.string());
  write_magic(out, "NSPW");
  write_u32(out, kVersion);
  write_u32(out, static_cast<std::uint32_t>(tensors.size()));
  std::uint64_t offset = 0;
  for (const Tensor& t : tensors) {
    if (element_count(t, path.string()) != t.data.size()) {
      throw ShapeError("write_nspw: tensor '" + t.name + "' shape does not match its data");
    }
    write_string(out, t.name);
    write_u32(out, static_cast<std::uint32_t>(t.shape.size()));
    for (std::uint64_t d : t.shape) write_u64(out, d);
    write_u64(out, offset);
    offset += 8 * t.data.size();
  }
  for (const Tensor& t : tensors) write_f64s(out, t.data);
  if (!out) throw Error("failed writing weight blob " + path.string());
}

std::vector<Tensor> read_nspw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open weight blob " + path.string());
  const std::string what = "weight blob " + path.string();
  expect_magic(in, "NSPW", what);
  const std::uint32_t version = read_u32(in, what);
  if (version != kVersion) throw FormatError(what + ": unsupported version " + std::to_string(version));
  const std::uint32_t count = read_u32(in, what);

  const auto file_size = std::filesystem::file_size(path);
  std::vector<Tensor> tensors;
  std::vector<std::uint64_t> offsets;
  for (std::uint32_t i = 0; i < count; ++i) {
    Tensor t;
    t.name = read_string(in, what);
    const std::uint32_t rank = read_u32(in, what);
    if (rank > kMaxRank) throw FormatError(what + ": tensor '" + t.name + "' has rank " + std::to_string(rank));
    for (std::uint32_t k = 0; k < rank; ++k) t.shape.push_back(read_u64(in, what));
    offsets.push_back(read_u64(in, what));
    tensors.push_back(std::move(t));
  }
  const auto data_start = static_cast<std::uint64_t>(in.tellg());
  std::uint64_t expected = 0;
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const std::uint64_t n = element_count(tensors[i], what);
    if (offsets[i] != expected) {
      throw FormatError(what + ": tensor '" + tensors[i].name + "' offset " + std::to_string(offsets[i]) +
                        " does not follow the previous tensor");
    }
    if (n > (file_size - data_start) / 8) throw FormatError(what + ": truncated data");
    expected += 8 * n;
  }
  if (data_start + expected != file_size) {
    throw FormatError(what + ": data section is " + std::to_string(file_size - data_start) +
                      " bytes, table describes " + std::to_string(expected));
  }
  for (Tensor& t : tensors) t.data = read_f64s(in, element_count(t, what), what);
  return tensors;
}

const Tensor& find_tensor(const std::vector<Tensor>& tensors, const std::string& name) {
  for (const Tensor& t : tensors) {
    if (t.name == name) return t;
  }
  throw FormatError("weight blob has no tensor named '" + name + "'");
}

}  // namespace nsp::io
