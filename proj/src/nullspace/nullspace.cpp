#include "nsp/nullspace/nullspace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "nsp/error.hpp"
#include "nsp/io/binary.hpp"
#include "nsp/linalg/factorization.hpp"
#include "nsp/linalg/vector_ops.hpp"
#include "nsp/rng.hpp"
#include "nsp/simd/kernels.hpp"

namespace nsp {
namespace {

constexpr std::uint32_t kBasisVersion = 1;

std::string shape_text(const TensorShape& s) {
  if (s.is_flat()) return std::to_string(s.channels);
  return std::to_string(s.channels) + "x" + std::to_string(s.height) + "x" + std::to_string(s.width);
}

void require_length(const NullspaceBasis& basis, std::size_t n, const char* op) {
  if (n != basis.ambient_dim) {
    throw ShapeError(std::string(op) + ": vector has " + std::to_string(n) +
                     " entries, basis ambient dimension is " + std::to_string(basis.ambient_dim));
  }
}

std::vector<double> orthogonal_part(const NullspaceBasis& basis, std::span<const double> delta) {
  return orthogonal_decompose(basis, delta).orthogonal;
}

struct VectorVerdict {
  Verdict verdict;
  double alpha;
};

// u versus v: equal, u = alpha * v, or neither, relative to max(|u|, |v|, 1).
VectorVerdict compare_vectors(std::span<const double> u, std::span<const double> v) {
  const double nu = norm2(u);
  const double nv = norm2(v);
  const double tol = kVerdictTolerance * std::max({nu, nv, 1.0});
  if (norm2(subtract(u, v)) <= tol) return {Verdict::identical, 1.0};
  if (nv <= tol) return {Verdict::different, 0.0};
  const double alpha = dot(u, v) / (nv * nv);
  if (norm2(add_scaled(u, -alpha, v)) <= tol) return {Verdict::proportional, alpha};
  return {Verdict::different, 0.0};
}

}  // namespace

std::string describe(const EquivalentMatrix& eq) {
  return std::string(layer_kind_name(eq.layer_kind)) + " " + shape_text(eq.input_shape) + " -> " +
         shape_text(eq.output_shape);
}

NullspaceBasis harmless_basis(const EquivalentMatrix& eq) {
  NullspaceResult ns = nullspace_with_rank(eq.matrix.to_dense());
  NullspaceBasis out;
  out.ambient_dim = eq.matrix.cols();
  out.dim = ns.basis.cols();
  out.basis = std::move(ns.basis);
  out.source = describe(eq);
  out.rank = ns.rank;
  out.sigma_max = ns.sigma_max;
  return out;
}

NullspaceBasis basis_from_matrix(DenseMatrix u, std::string source) {
  if (!u.all_finite()) throw ShapeError("basis_from_matrix: basis has non-finite entries");
  NullspaceBasis out;
  out.ambient_dim = u.rows();
  out.dim = u.cols();
  out.rank = u.rows() - u.cols();
  out.basis = std::move(u);
  out.source = std::move(source);
  return out;
}

BasisCheck check_basis(const NullspaceBasis& basis, const EquivalentMatrix& eq) {
  if (basis.ambient_dim != eq.matrix.cols()) {
    throw ShapeError("check_basis: basis ambient dimension " + std::to_string(basis.ambient_dim) +
                     " does not match layer input size " + std::to_string(eq.matrix.cols()));
  }
  BasisCheck c;
  c.orthonormality_error = orthonormality_error(basis.basis);
  c.residual = basis.dim == 0 ? 0.0 : eq.matrix.multiply(basis.basis).max_abs();
  c.tolerance = 1e-10 * estimate_sigma_max(eq.matrix);
  return c;
}

Decomposition orthogonal_decompose(const NullspaceBasis& basis, std::span<const double> delta) {
  require_length(basis, delta.size(), "orthogonal_decompose");
  Decomposition d;
  if (basis.dim == 0) {
    d.parallel.assign(delta.size(), 0.0);
    d.orthogonal.assign(delta.begin(), delta.end());
    return d;
  }
  const std::vector<double> coeffs = basis.basis.multiply_transposed(delta);
  d.parallel = basis.basis.multiply(coeffs);
  d.orthogonal = subtract(delta, d.parallel);
  return d;
}

DenseMatrix projector(const NullspaceBasis& basis) {
  if (basis.ambient_dim > 512) {
    throw ShapeError("projector: ambient dimension " + std::to_string(basis.ambient_dim) +
                     " exceeds 512; use orthogonal_decompose instead");
  }
  if (basis.dim == 0) return DenseMatrix(basis.ambient_dim, basis.ambient_dim);
  return matmul(basis.basis, basis.basis.transposed());
}

std::vector<double> sample_harmless(const NullspaceBasis& basis, std::uint64_t seed,
                                    double target_norm, NormKind kind) {
  if (basis.dim == 0) {
    throw EmptySubspaceError("sample_harmless: harmless subspace of " + basis.source +
                             " is {0}; nothing to sample");
  }
  if (!(target_norm > 0.0) || !std::isfinite(target_norm)) {
    throw Error("sample_harmless: target_norm must be positive and finite");
  }
  Rng rng(seed);
  std::vector<double> delta = basis.basis.multiply(rng.gaussian_vector(basis.dim));
  if (kind == NormKind::l2) {
    const double n = norm2(delta);
    for (double& v : delta) v *= target_norm / n;
  } else {
    const auto peak = std::max_element(delta.begin(), delta.end(),
                                       [](double a, double b) { return std::abs(a) < std::abs(b); });
    const double n = std::abs(*peak);
    for (double& v : delta) v *= target_norm / n;
    // Pin the peak so the norm is exact rather than within an ulp.
    *peak = std::copysign(target_norm, *peak);
  }
  return delta;
}

LeastHarmful least_harmful(const EquivalentMatrix& eq) {
  DenseMatrix a = eq.matrix.to_dense();
  if (a.rows() < a.cols()) {
    // Zero rows leave A^T A unchanged.
    DenseMatrix padded(a.cols(), a.cols());
    std::copy(a.data().begin(), a.data().end(), padded.data().begin());
    a = std::move(padded);
  }
  EigenPair p = smallest_eigenpair_gram(a);
  LeastHarmful out;
  out.direction = std::move(p.vector);
  out.residual = p.value;
  out.harmless = eq.matrix.rows() < eq.matrix.cols() ||
                 numerical_rank(singular_values(a), a.rows(), a.cols()) < a.cols();
  return out;
}

const char* verdict_name(Verdict v) noexcept {
  switch (v) {
    case Verdict::identical: return "identical-output";
    case Verdict::proportional: return "proportional";
    case Verdict::different: return "different-output";
  }
  return "unknown";
}

PairClassification classify_pair(const NullspaceBasis& basis, const EquivalentMatrix& eq,
                                 std::span<const double> delta,
                                 std::span<const double> delta_hat) {
  require_length(basis, delta.size(), "classify_pair");
  require_length(basis, delta_hat.size(), "classify_pair");
  const VectorVerdict by_components = compare_vectors(orthogonal_part(basis, delta),
                                                      orthogonal_part(basis, delta_hat));
  const VectorVerdict by_outputs = compare_vectors(eq.matrix.multiply(delta),
                                                   eq.matrix.multiply(delta_hat));
  PairClassification c;
  c.verdict = by_components.verdict;
  c.alpha = by_components.alpha;
  c.direct_verdict = by_outputs.verdict;
  c.direct_alpha = by_outputs.alpha;
  return c;
}

void save_basis(const std::filesystem::path& path, const NullspaceBasis& basis) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write basis file " + path.string());
  io::write_magic(out, "NSPB");
  io::write_u32(out, kBasisVersion);
  io::write_u64(out, basis.ambient_dim);
  io::write_u64(out, basis.dim);
  for (std::size_t c = 0; c < basis.dim; ++c) io::write_f64s(out, basis.basis.column(c));
  if (!out) throw Error("failed writing basis file " + path.string());
}

NullspaceBasis load_basis(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open basis file " + path.string());
  const std::string what = "basis file " + path.string();
  io::expect_magic(in, "NSPB", what);
  const std::uint32_t version = io::read_u32(in, what);
  if (version != kBasisVersion) {
    throw FormatError(what + ": unsupported version " + std::to_string(version));
  }
  const std::uint64_t n = io::read_u64(in, what);
  const std::uint64_t d = io::read_u64(in, what);
  if (d > n) throw FormatError(what + ": dimension exceeds ambient dimension");
  const auto file_size = std::filesystem::file_size(path);
  if (n != 0 && (file_size - 24) / 8 / n < d) throw FormatError(what + ": truncated data");
  DenseMatrix u(n, d);
  for (std::size_t c = 0; c < d; ++c) u.set_column(c, io::read_f64s(in, n, what));
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError(what + ": trailing bytes");
  return basis_from_matrix(std::move(u), path.filename().string());
}

}  // namespace nsp
