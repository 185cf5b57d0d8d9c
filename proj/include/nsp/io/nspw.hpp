#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace nsp::io {

struct Tensor {
  std::string name;
  std::vector<std::uint64_t> shape;
  std::vector<double> data;  // row-major, product(shape) values
};

// "NSPW", u32 version, u32 tensor count, then per tensor: u32 name length,
// name bytes, u32 rank, u64 dims, u64 byte offset into the data section.
// The data section follows the table: float64 little-endian, tensors in
// table order.
void write_nspw(const std::filesystem::path& path, const std::vector<Tensor>& tensors);
std::vector<Tensor> read_nspw(const std::filesystem::path& path);

/// Throws FormatError if `name` is absent.
const Tensor& find_tensor(const std::vector<Tensor>& tensors, const std::string& name);

}  // namespace nsp::io
