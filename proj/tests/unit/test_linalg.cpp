#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <limits>

#include "nsp/error.hpp"
#include "nsp/linalg/dense_matrix.hpp"
#include "nsp/linalg/factorization.hpp"
#include "nsp/linalg/sparse_matrix.hpp"
#include "nsp/linalg/vector_ops.hpp"
#include "nsp/simd/kernels.hpp"
#include "test_helpers.hpp"

using namespace nsp;
using nsp::test::gaussian_matrix;
using nsp::simd::sum_squares;

namespace {

double reconstruction_error(const DenseMatrix& m, const SvdResult& s) {
  DenseMatrix ls = s.left_vectors;
  for (std::size_t r = 0; r < ls.rows(); ++r) {
    for (std::size_t c = 0; c < ls.cols(); ++c) ls(r, c) *= s.singular_values[c];
  }
  return max_abs_diff(matmul(ls, s.right_vectors.transposed()), m);
}

// Independent oracle: symmetric eigensolver on the explicit Gram matrix.
double gram_lambda_min(const DenseMatrix& m) {
  Eigen::MatrixXd a(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) a(r, c) = m(r, c);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.transpose() * a);
  return es.eigenvalues()(0);
}

}  // namespace

TEST_SUITE("linalg") {
  TEST_CASE("dense matrix construction and shape checks") {
    CHECK_THROWS_AS(DenseMatrix(2, 2, {1.0, 2.0, 3.0}), ShapeError);
    const DenseMatrix m = DenseMatrix::from_rows({{1, 2, 3}, {4, 5, 6}});
    CHECK(m.rows() == 2);
    CHECK(m.cols() == 3);
    CHECK(m(1, 2) == 6.0);
    CHECK(m.transposed()(2, 1) == 6.0);
    const std::vector<double> x{1, 0, -1};
    CHECK(m.multiply(x) == std::vector<double>{-2, -2});
    const std::vector<double> y{1, 1};
    CHECK(m.multiply_transposed(y) == std::vector<double>{5, 7, 9});
    CHECK_THROWS_AS(m.multiply(y), ShapeError);
    CHECK(m.column(1) == std::vector<double>{2, 5});
    CHECK(DenseMatrix::from_columns(2, {{1, 4}, {2, 5}, {3, 6}}) == m);
    CHECK(matmul(DenseMatrix::identity(2), m) == m);
    CHECK(orthonormality_error(DenseMatrix::identity(4)) == 0.0);
  }

  TEST_CASE("sparse matrix invariants") {
    SparseMatrix s(2, 4);
    s.push_row({{3, 1.0}, {0, 2.0}, {1, 0.0}});
    CHECK(s.row_columns(0).size() == 2);
    CHECK(s.row_columns(0)[0] == 0);
    CHECK(s.row_columns(0)[1] == 3);
    CHECK_THROWS_AS(s.multiply(std::vector<double>{1, 1, 1, 1}), ShapeError);
    CHECK_THROWS_AS(s.push_row({{1, 1.0}, {1, 2.0}}), ShapeError);
    CHECK_THROWS_AS(s.push_row({{4, 1.0}}), ShapeError);
    CHECK_THROWS(s.push_row({{0, std::numeric_limits<double>::infinity()}}));
    s.push_row({{2, -1.0}});
    CHECK(s.nnz() == 3);
    CHECK(s.max_row_nnz() == 2);
    CHECK(s.multiply(std::vector<double>{1, 2, 3, 4}) == std::vector<double>{6, -3});
    const DenseMatrix d = s.to_dense();
    CHECK(d(0, 3) == 1.0);
    CHECK(d(1, 2) == -1.0);
    const DenseMatrix b = gaussian_matrix(4, 3, 9);
    CHECK(max_abs_diff(s.multiply(b), matmul(d, b)) <= 1e-15);
  }

  TEST_CASE("svd examples") {
    const SvdResult id = svd(DenseMatrix::identity(3));
    CHECK(id.singular_values == std::vector<double>{1, 1, 1});

    const SvdResult diag = svd(DenseMatrix::from_rows({{3, 0}, {0, 0}}));
    CHECK(diag.singular_values[0] == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(diag.singular_values[1] == 0.0);

    const DenseMatrix m = gaussian_matrix(5, 8, 42);
    const SvdResult s = svd(m);
    CHECK(s.singular_values.size() == 5);
    CHECK(reconstruction_error(m, s) <= 1e-10 * std::max(1.0, s.singular_values[0]));
    CHECK(orthonormality_error(s.left_vectors) <= 1e-12);
    CHECK(orthonormality_error(s.right_vectors) <= 1e-12);
    for (std::size_t i = 1; i < s.singular_values.size(); ++i) {
      CHECK(s.singular_values[i] <= s.singular_values[i - 1]);
    }
  }

  TEST_CASE("svd rejects non-finite input naming the shape") {
    DenseMatrix m(2, 3);
    m(1, 1) = std::numeric_limits<double>::quiet_NaN();
    try {
      (void)svd(m);
      FAIL("expected FactorizationError");
    } catch (const FactorizationError& e) {
      CHECK(std::string(e.what()).find("2x3") != std::string::npos);
    }
  }

  TEST_CASE("svd is deterministic") {
    const DenseMatrix m = gaussian_matrix(30, 20, 3);
    const SvdResult a = svd(m);
    const SvdResult b = svd(m);
    CHECK(a.singular_values == b.singular_values);
    CHECK(a.left_vectors == b.left_vectors);
    CHECK(a.right_vectors == b.right_vectors);
    CHECK(orthonormal_nullspace(gaussian_matrix(7, 19, 4)) ==
          orthonormal_nullspace(gaussian_matrix(7, 19, 4)));
  }

  TEST_CASE("numerical rank examples") {
    CHECK(numerical_rank(std::vector<double>{1, 1, 0}, 2, 3) == 2);
    CHECK(numerical_rank(std::vector<double>{5, 5e-18}, 2, 2) == 1);
    CHECK(numerical_rank(std::vector<double>{0, 0}, 2, 2) == 0);
    CHECK(numerical_rank(std::vector<double>{}, 0, 3) == 0);
    const DenseMatrix m = gaussian_matrix(5, 8, 42);
    CHECK(numerical_rank(singular_values(m), 5, 8) == 5);
  }

  TEST_CASE("orthonormal nullspace examples") {
    const DenseMatrix e3 = orthonormal_nullspace(DenseMatrix::from_rows({{1, 0, 0}, {0, 1, 0}}));
    REQUIRE(e3.cols() == 1);
    CHECK(std::abs(e3(0, 0)) <= 1e-15);
    CHECK(std::abs(e3(1, 0)) <= 1e-15);
    CHECK(e3(2, 0) == doctest::Approx(1.0).epsilon(1e-15));

    CHECK(orthonormal_nullspace(gaussian_matrix(4, 4, 1)).cols() == 0);
    CHECK(orthonormal_nullspace(gaussian_matrix(4, 4, 1)).rows() == 4);

    const DenseMatrix m = gaussian_matrix(5, 8, 42);
    const DenseMatrix u = orthonormal_nullspace(m);
    CHECK(u.cols() == 3);
    CHECK(orthonormality_error(u) <= 1e-12);
    CHECK(matmul(m, u).max_abs() <= 1e-10 * singular_values(m)[0]);
  }

  TEST_CASE("nullspace sign convention") {
    const DenseMatrix u = orthonormal_nullspace(gaussian_matrix(6, 11, 77));
    for (std::size_t c = 0; c < u.cols(); ++c) {
      std::size_t best = 0;
      for (std::size_t r = 1; r < u.rows(); ++r) {
        if (std::abs(u(r, c)) > std::abs(u(best, c))) best = r;
      }
      CHECK(u(best, c) > 0.0);
    }
  }

  TEST_CASE("rank-deficient matrices in every shape regime") {
    // Rank-r products G1 (m x r) * G2 (r x n).
    struct Case { std::size_t m, n, r; };
    for (const Case c : {Case{6, 10, 3}, Case{10, 6, 3}, Case{8, 8, 5}, Case{12, 30, 1},
                         Case{40, 25, 24}}) {
      CAPTURE(c.m);
      CAPTURE(c.n);
      const DenseMatrix a = matmul(gaussian_matrix(c.m, c.r, c.m * 100 + c.n),
                                   gaussian_matrix(c.r, c.n, c.r * 7 + 1));
      const NullspaceResult ns = nullspace_with_rank(a);
      CHECK(ns.rank == c.r);
      CHECK(ns.basis.cols() == c.n - c.r);
      CHECK(orthonormality_error(ns.basis) <= 1e-12);
      CHECK(matmul(a, ns.basis).max_abs() <= 1e-10 * ns.sigma_max);
      CHECK(ns.rank + ns.basis.cols() == a.cols());
    }
  }

  TEST_CASE("zero and empty matrices") {
    const NullspaceResult z = nullspace_with_rank(DenseMatrix(3, 4));
    CHECK(z.rank == 0);
    CHECK(z.basis.cols() == 4);
    CHECK(orthonormality_error(z.basis) <= 1e-15);
    CHECK(orthonormal_nullspace(DenseMatrix(0, 3)).cols() == 3);
    CHECK(orthonormal_nullspace(DenseMatrix(3, 0)).cols() == 0);
  }

  TEST_CASE("sparse nullspace matches dense") {
    SparseMatrix s(2, 3);
    s.push_row({{0, 1.0}});
    s.push_row({{1, 1.0}});
    CHECK(orthonormal_nullspace(s) == orthonormal_nullspace(s.to_dense()));
  }

  TEST_CASE("rank-nullity over random shapes") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      Rng rng(seed);
      const auto rows = static_cast<std::size_t>(rng.uniform(1, 30));
      const auto cols = static_cast<std::size_t>(rng.uniform(1, 30));
      const DenseMatrix m = gaussian_matrix(rows, cols, seed + 500);
      const std::size_t rank = numerical_rank(singular_values(m), rows, cols);
      CHECK(rank + orthonormal_nullspace(m).cols() == cols);
    }
  }

  TEST_CASE("orthonormalize_columns rejects dependent columns") {
    CHECK_THROWS_AS(orthonormalize_columns(DenseMatrix::from_rows({{1, 2}, {1, 2}})),
                    FactorizationError);
    const DenseMatrix q = orthonormalize_columns(gaussian_matrix(9, 4, 2));
    CHECK(orthonormality_error(q) <= 1e-15);
  }

  TEST_CASE("smallest eigenpair examples") {
    const EigenPair p = smallest_eigenpair_gram(DenseMatrix::from_rows({{2, 0}, {0, 1}, {0, 0}}));
    CHECK(p.value == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(p.vector[0]) <= 1e-15);
    CHECK(p.vector[1] == doctest::Approx(1.0).epsilon(1e-15));

    const DenseMatrix q = orthonormalize_columns(gaussian_matrix(6, 3, 8));
    const EigenPair o = smallest_eigenpair_gram(q);
    CHECK(o.value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(norm2(q.multiply(o.vector)) == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(smallest_eigenpair_gram(gaussian_matrix(3, 5, 1)), ShapeError);
  }

  TEST_CASE("smallest eigenpair against Gram eigensolver and random sampling") {
    const DenseMatrix m = gaussian_matrix(8, 5, 2024);
    const EigenPair p = smallest_eigenpair_gram(m);
    CHECK(std::abs(p.value - gram_lambda_min(m)) <= 1e-12);
    CHECK(norm2(p.vector) == doctest::Approx(1.0).epsilon(1e-12));
    const double achieved = sum_squares(m.multiply(p.vector));
    CHECK(std::abs(achieved - p.value) <= 1e-10 * std::max(p.value, 1e-300));
    CHECK(p.vector[0] > 0.0);

    Rng rng(99);
    std::size_t violations = 0;
    for (int t = 0; t < 10000; ++t) {
      const auto d = rng.unit_vector(5);
      if (sum_squares(m.multiply(d)) < p.value - 1e-10) ++violations;
    }
    CHECK(violations == 0);
  }

  TEST_CASE("vector ops") {
    const std::vector<double> a{3, -4};
    CHECK(norm2(a) == 5.0);
    CHECK(norm_inf(a) == 4.0);
    CHECK(mean_squared_error(a, std::vector<double>{0, 0}) == 12.5);
    CHECK(add_scaled(a, 2.0, a) == std::vector<double>{9, -12});
    CHECK_THROWS_AS(dot(a, std::vector<double>{1}), ShapeError);
    CHECK_FALSE(all_finite(std::vector<double>{1, std::numeric_limits<double>::infinity()}));
  }
}
