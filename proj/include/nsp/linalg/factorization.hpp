#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nsp/linalg/dense_matrix.hpp"
#include "nsp/linalg/sparse_matrix.hpp"

namespace nsp {

/// Thin SVD: M = L diag(sigma) R^T with k = min(rows, cols) columns in L and R.
struct SvdResult {
  DenseMatrix left_vectors;
  std::vector<double> singular_values;  // non-increasing, >= 0
  DenseMatrix right_vectors;
};

/// Throws FactorizationError (naming the shape) if the iteration fails.
SvdResult svd(const DenseMatrix& m);

/// Singular values only, non-increasing. Cheaper than svd() for rank queries.
std::vector<double> singular_values(const DenseMatrix& m);

/// sigma_max * max(rows, cols) * machine epsilon.
double rank_tolerance(std::span<const double> sv, std::size_t rows, std::size_t cols);

/// Count of singular values strictly above rank_tolerance().
std::size_t numerical_rank(std::span<const double> sv, std::size_t rows, std::size_t cols);

struct NullspaceResult {
  DenseMatrix basis;  // cols x (cols - rank), orthonormal columns
  std::size_t rank = 0;
  double sigma_max = 0.0;
};

/// Nullspace spanned by the right singular vectors with sigma <= tolerance.
/// Wide matrices are reduced by a Householder QR of M^T first, so the
/// (cols - rows) trailing right singular vectors come straight from Q. Columns
/// are re-orthonormalized and signed so their largest-magnitude entry is
/// positive.
NullspaceResult nullspace_with_rank(const DenseMatrix& m);

DenseMatrix orthonormal_nullspace(const DenseMatrix& m);
DenseMatrix orthonormal_nullspace(const SparseMatrix& m);

/// Two passes of modified Gram-Schmidt. Throws FactorizationError if the
/// columns are numerically dependent.
DenseMatrix orthonormalize_columns(const DenseMatrix& m);

/// Flips each column so that its largest-magnitude entry (first on ties) is positive.
void canonicalize_column_signs(DenseMatrix& m);

struct EigenPair {
  std::vector<double> vector;  // unit length
  double value = 0.0;
};

/// Smallest eigenvalue of M^T M and its eigenvector, computed as the last
/// right singular vector of M (sigma_min^2 = lambda_min). The vector is signed
/// so its first component with |v_i| > 1e-12 is positive. Requires
/// cols <= rows.
EigenPair smallest_eigenpair_gram(const DenseMatrix& m);

}  // namespace nsp
