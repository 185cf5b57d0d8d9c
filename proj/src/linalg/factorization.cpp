#include "nsp/linalg/factorization.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "nsp/error.hpp"
#include "nsp/simd/kernels.hpp"

namespace nsp {
namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::string shape_of(std::size_t rows, std::size_t cols) {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

Eigen::MatrixXd to_eigen(const DenseMatrix& m) {
  return Eigen::Map<const RowMajor>(m.data().data(), static_cast<Eigen::Index>(m.rows()),
                                    static_cast<Eigen::Index>(m.cols()));
}

DenseMatrix from_eigen(const Eigen::MatrixXd& m) {
  DenseMatrix out(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
  Eigen::Map<RowMajor>(out.data().data(), m.rows(), m.cols()) = m;
  return out;
}

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

void require_finite(const DenseMatrix& m, const char* op) {
  if (!m.all_finite()) {
    throw FactorizationError(std::string(op) + ": matrix " + shape_of(m.rows(), m.cols()) +
                             " has non-finite entries");
  }
}

template <class Svd>
void check_svd(const Svd& svd, Eigen::Index rows, Eigen::Index cols) {
  if (svd.info() != Eigen::Success) {
    throw FactorizationError("SVD failed to converge for " +
                             shape_of(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols)) +
                             " matrix");
  }
}

Eigen::VectorXd eigen_singular_values(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return {};
  Eigen::BDCSVD<Eigen::MatrixXd> s(m);
  check_svd(s, m.rows(), m.cols());
  return s.singularValues();
}

}  // namespace

SvdResult svd(const DenseMatrix& m) {
  require_finite(m, "svd");
  const std::size_t k = std::min(m.rows(), m.cols());
  if (k == 0) return {DenseMatrix(m.rows(), 0), {}, DenseMatrix(m.cols(), 0)};
  const Eigen::MatrixXd a = to_eigen(m);
  Eigen::BDCSVD<Eigen::MatrixXd> s(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  check_svd(s, a.rows(), a.cols());
  return {from_eigen(s.matrixU()), to_vector(s.singularValues()), from_eigen(s.matrixV())};
}

std::vector<double> singular_values(const DenseMatrix& m) {
  require_finite(m, "singular_values");
  return to_vector(eigen_singular_values(to_eigen(m)));
}

double rank_tolerance(std::span<const double> sv, std::size_t rows, std::size_t cols) {
  if (sv.empty()) return 0.0;
  const double sigma_max = *std::max_element(sv.begin(), sv.end());
  return sigma_max * static_cast<double>(std::max(rows, cols)) *
         std::numeric_limits<double>::epsilon();
}

std::size_t numerical_rank(std::span<const double> sv, std::size_t rows, std::size_t cols) {
  const double tol = rank_tolerance(sv, rows, cols);
  return static_cast<std::size_t>(
      std::count_if(sv.begin(), sv.end(), [tol](double s) { return s > tol; }));
}

DenseMatrix orthonormalize_columns(const DenseMatrix& m) {
  const std::size_t n = m.rows();
  const std::size_t d = m.cols();
  // Work on rows of the transpose so every column access is contiguous.
  DenseMatrix q = m.transposed();
  const auto& k = simd::active();
  for (std::size_t pass = 0; pass < 2; ++pass) {
    for (std::size_t j = 0; j < d; ++j) {
      double* qj = q.row(j).data();
      for (std::size_t i = 0; i < j; ++i) {
        const double* qi = q.row(i).data();
        k.axpy(-k.dot(qi, qj, n), qi, qj, n);
      }
      const double norm = std::sqrt(k.sum_squares(qj, n));
      if (!(norm > 1e-8)) {
        throw FactorizationError("orthonormalize_columns: column " + std::to_string(j) +
                                 " of " + shape_of(n, d) + " is numerically dependent");
      }
      for (std::size_t t = 0; t < n; ++t) qj[t] /= norm;
    }
  }
  return q.transposed();
}

void canonicalize_column_signs(DenseMatrix& m) {
  for (std::size_t j = 0; j < m.cols(); ++j) {
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      const double a = std::fabs(m(i, j));
      if (a > best) {
        best = a;
        arg = i;
      }
    }
    if (m.rows() > 0 && m(arg, j) < 0.0) {
      for (std::size_t i = 0; i < m.rows(); ++i) m(i, j) = -m(i, j);
    }
  }
}

NullspaceResult nullspace_with_rank(const DenseMatrix& m) {
  require_finite(m, "orthonormal_nullspace");
  const auto rows = static_cast<Eigen::Index>(m.rows());
  const auto cols = static_cast<Eigen::Index>(m.cols());
  NullspaceResult out;
  if (cols == 0) {
    out.basis = DenseMatrix(0, 0);
    return out;
  }
  if (rows == 0) {
    out.basis = DenseMatrix::identity(m.cols());
    return out;
  }

  Eigen::MatrixXd null_vectors;
  if (rows < cols) {
    // M^T = Q [R; 0]  =>  M = [R^T 0] Q^T. The trailing cols-rows columns of Q
    // are right singular vectors with sigma = 0, and the remaining nullspace
    // directions are Q1 * N(R^T).
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(to_eigen(m).transpose());
    const Eigen::MatrixXd r = qr.matrixQR().topRows(rows).triangularView<Eigen::Upper>();
    const Eigen::VectorXd sv = eigen_singular_values(r);
    out.sigma_max = sv.size() > 0 ? sv(0) : 0.0;
    out.rank = numerical_rank(std::span<const double>(sv.data(), static_cast<std::size_t>(sv.size())),
                              m.rows(), m.cols());
    const Eigen::Index deficient = rows - static_cast<Eigen::Index>(out.rank);
    null_vectors = Eigen::MatrixXd::Zero(cols, deficient + (cols - rows));
    if (deficient > 0) {
      Eigen::BDCSVD<Eigen::MatrixXd> s(r.transpose(), Eigen::ComputeFullV);
      check_svd(s, rows, rows);
      null_vectors.topLeftCorner(rows, deficient) = s.matrixV().rightCols(deficient);
    }
    null_vectors.bottomRightCorner(cols - rows, cols - rows).setIdentity();
    null_vectors.applyOnTheLeft(qr.householderQ());
  } else {
    const Eigen::MatrixXd a = to_eigen(m);
    const Eigen::VectorXd sv = eigen_singular_values(a);
    out.sigma_max = sv(0);
    out.rank = numerical_rank(std::span<const double>(sv.data(), static_cast<std::size_t>(sv.size())),
                              m.rows(), m.cols());
    const Eigen::Index deficient = cols - static_cast<Eigen::Index>(out.rank);
    if (deficient == 0) {
      out.basis = DenseMatrix(m.cols(), 0);
      return out;
    }
    Eigen::BDCSVD<Eigen::MatrixXd> s(a, Eigen::ComputeThinV);
    check_svd(s, rows, cols);
    null_vectors = s.matrixV().rightCols(deficient);
  }

  out.basis = orthonormalize_columns(from_eigen(null_vectors));
  canonicalize_column_signs(out.basis);
  return out;
}

DenseMatrix orthonormal_nullspace(const DenseMatrix& m) { return nullspace_with_rank(m).basis; }

DenseMatrix orthonormal_nullspace(const SparseMatrix& m) {
  return nullspace_with_rank(m.to_dense()).basis;
}

EigenPair smallest_eigenpair_gram(const DenseMatrix& m) {
  require_finite(m, "smallest_eigenpair_gram");
  if (m.cols() == 0 || m.cols() > m.rows()) {
    throw ShapeError("smallest_eigenpair_gram: need 0 < cols <= rows, got " +
                     shape_of(m.rows(), m.cols()));
  }
  const Eigen::MatrixXd a = to_eigen(m);
  Eigen::BDCSVD<Eigen::MatrixXd> s(a, Eigen::ComputeThinV);
  check_svd(s, a.rows(), a.cols());
  // Singular values are non-increasing, so the last column is the smallest
  // eigenvalue of the Gram matrix; among ties the factorization order decides.
  const Eigen::Index last = a.cols() - 1;
  EigenPair out;
  out.vector = to_vector(s.matrixV().col(last));
  const double sigma = s.singularValues()(last);
  out.value = sigma * sigma;
  for (double v : out.vector) {
    if (std::fabs(v) > 1e-12) {
      if (v < 0.0) {
        for (double& x : out.vector) x = -x;
      }
      break;
    }
  }
  return out;
}

}  // namespace nsp
