#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "nsp/layer/equivalent.hpp"
#include "nsp/linalg/dense_matrix.hpp"

namespace nsp {

/// Orthonormal basis U (n x d) of the harmless subspace of one layer.
struct NullspaceBasis {
  DenseMatrix basis;
  std::size_t ambient_dim = 0;
  std::size_t dim = 0;
  std::string source;  // free-form description of the originating layer
  std::size_t rank = 0;
  double sigma_max = 0.0;
};

std::string describe(const EquivalentMatrix& eq);

/// d = cols - numerical_rank. A full-column-rank layer yields d = 0.
NullspaceBasis harmless_basis(const EquivalentMatrix& eq);

/// Wraps an existing n x d matrix; columns are trusted to be orthonormal.
NullspaceBasis basis_from_matrix(DenseMatrix u, std::string source = "external");

struct BasisCheck {
  double orthonormality_error = 0.0;  // ||U^T U - I||_max
  double residual = 0.0;              // ||A U||_max
  double tolerance = 0.0;             // 1e-10 * sigma_max(A)
  bool ok() const noexcept { return orthonormality_error <= 1e-12 && residual <= tolerance; }
};

/// Checks the basis against A. sigma_max is recomputed from A, not taken from
/// the basis.
BasisCheck check_basis(const NullspaceBasis& basis, const EquivalentMatrix& eq);

struct Decomposition {
  std::vector<double> parallel;    // U (U^T delta), harmless
  std::vector<double> orthogonal;  // delta - parallel
};

Decomposition orthogonal_decompose(const NullspaceBasis& basis, std::span<const double> delta);

/// U U^T. Only built for n <= 512; larger bases throw ShapeError.
DenseMatrix projector(const NullspaceBasis& basis);

enum class NormKind { l2, linf };

/// delta = U c with seeded Gaussian c, rescaled so the chosen norm equals
/// target_norm. Throws EmptySubspaceError when d = 0.
std::vector<double> sample_harmless(const NullspaceBasis& basis, std::uint64_t seed,
                                    double target_norm, NormKind kind);

struct LeastHarmful {
  std::vector<double> direction;  // unit length
  double residual = 0.0;          // lambda_min of A^T A
  /// Set when the layer has a nontrivial harmless subspace, in which case the
  /// direction is harmless rather than merely least harmful.
  bool harmless = false;
};

/// Unit vector minimizing ||A v||, via the smallest eigenpair of A^T A.
LeastHarmful least_harmful(const EquivalentMatrix& eq);

enum class Verdict { identical, proportional, different };

const char* verdict_name(Verdict v) noexcept;

struct PairClassification {
  Verdict verdict = Verdict::different;
  double alpha = 0.0;  // set when verdict == proportional
  /// Same classification done on A*delta and A*delta_hat directly.
  Verdict direct_verdict = Verdict::different;
  double direct_alpha = 0.0;
  bool agrees() const noexcept { return verdict == direct_verdict; }
};

inline constexpr double kVerdictTolerance = 1e-9;

/// Compares two perturbations through their orthogonal components.
PairClassification classify_pair(const NullspaceBasis& basis, const EquivalentMatrix& eq,
                                 std::span<const double> delta,
                                 std::span<const double> delta_hat);

/// "NSPB", u32 version, u64 n, u64 d, then n*d float64 column-major, all
/// little-endian.
void save_basis(const std::filesystem::path& path, const NullspaceBasis& basis);
NullspaceBasis load_basis(const std::filesystem::path& path);

}  // namespace nsp
