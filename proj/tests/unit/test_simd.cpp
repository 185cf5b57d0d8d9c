#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "nsp/rng.hpp"
#include "nsp/simd/kernels.hpp"

using namespace nsp;
using namespace nsp::simd;

namespace {

std::vector<const KernelTable*> variants() {
  std::vector<const KernelTable*> out;
  for (Isa isa : {Isa::avx2, Isa::neon}) {
    if (isa_supported(isa)) out.push_back(&kernels_for(isa));
  }
  return out;
}

double tolerance(std::size_t n, double magnitude) {
  return 4.0 * static_cast<double>(n + 1) * std::numeric_limits<double>::epsilon() * magnitude;
}

}  // namespace

TEST_SUITE("simd") {
  TEST_CASE("scalar table is always available") {
    CHECK(isa_supported(Isa::scalar));
    CHECK(kernels_for(Isa::scalar).isa == Isa::scalar);
    CHECK(&scalar_kernels() == &kernels_for(Isa::scalar));
  }

  TEST_CASE("active table is one of the supported variants") {
    const KernelTable& t = active();
    CHECK(isa_supported(t.isa));
    CHECK(&active() == &t);
  }

  TEST_CASE("unavailable variants throw") {
    for (Isa isa : {Isa::avx2, Isa::neon}) {
      if (!isa_supported(isa)) CHECK_THROWS(kernels_for(isa));
    }
  }

  TEST_CASE("scalar reference values") {
    const KernelTable& s = scalar_kernels();
    const double a[] = {1, 2, 3};
    const double b[] = {4, -5, 6};
    CHECK(s.dot(a, b, 3) == 12.0);
    CHECK(s.sum_squares(a, 3) == 14.0);
    CHECK(s.max_abs_diff(a, b, 3) == 7.0);
    double y[] = {1, 1, 1};
    s.axpy(2.0, a, y, 3);
    CHECK(y[2] == 7.0);
    const double strided[] = {1, 9, 2, 9, 3};
    double z[] = {0, 0, 0};
    s.axpy_strided(-1.0, strided, 2, z, 3);
    CHECK(z[0] == -1.0);
    CHECK(z[2] == -3.0);
    const std::uint32_t idx[] = {2, 0};
    const double vals[] = {10, 100};
    CHECK(s.gather_dot(vals, idx, a, 2) == 130.0);
    CHECK(s.dot(a, b, 0) == 0.0);
  }

  TEST_CASE("SIMD variants match the scalar reference for every tail length") {
    const KernelTable& ref = scalar_kernels();
    const auto tables = variants();
    if (tables.empty()) MESSAGE("no SIMD variant on this machine; equivalence not exercised");
    for (const KernelTable* t : tables) {
      CAPTURE(isa_name(t->isa));
      for (std::size_t n = 0; n <= 67; ++n) {
        CAPTURE(n);
        Rng rng(1000 + n);
        const auto x = rng.gaussian_vector(3 * n + 1);
        const auto y = rng.gaussian_vector(n);
        double mag = 0.0;
        for (std::size_t i = 0; i < n; ++i) mag += std::abs(x[i] * y[i]);

        CHECK(std::abs(t->dot(x.data(), y.data(), n) - ref.dot(x.data(), y.data(), n)) <=
              tolerance(n, mag));
        CHECK(std::abs(t->sum_squares(y.data(), n) - ref.sum_squares(y.data(), n)) <=
              tolerance(n, ref.sum_squares(y.data(), n)));
        CHECK(t->max_abs_diff(x.data(), y.data(), n) == ref.max_abs_diff(x.data(), y.data(), n));

        std::vector<double> a = y, b = y;
        t->axpy(0.37, x.data(), a.data(), n);
        ref.axpy(0.37, x.data(), b.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(a[i] - b[i]) <= tolerance(1, 2.0 + std::abs(b[i])));

        for (std::size_t stride : {1u, 2u, 3u}) {
          std::vector<double> c = y, d = y;
          t->axpy_strided(-1.3, x.data(), stride, c.data(), n);
          ref.axpy_strided(-1.3, x.data(), stride, d.data(), n);
          for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(c[i] - d[i]) <= tolerance(1, 4.0 + std::abs(d[i])));
        }

        std::vector<std::uint32_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<std::uint32_t>((7 * i + 3) % (3 * n + 1));
        double gmag = 0.0;
        for (std::size_t i = 0; i < n; ++i) gmag += std::abs(y[i] * x[idx[i]]);
        CHECK(std::abs(t->gather_dot(y.data(), idx.data(), x.data(), n) -
                       ref.gather_dot(y.data(), idx.data(), x.data(), n)) <= tolerance(n, gmag));
      }
    }
  }

  TEST_CASE("max_abs_diff propagates NaN in every variant") {
    std::vector<const KernelTable*> all = variants();
    all.push_back(&scalar_kernels());
    for (const KernelTable* t : all) {
      for (std::size_t pos : {0u, 5u, 12u}) {
        std::vector<double> a(13, 1.0), b(13, 1.0);
        a[pos] = std::numeric_limits<double>::quiet_NaN();
        CHECK(std::isnan(t->max_abs_diff(a.data(), b.data(), 13)));
      }
    }
  }

  TEST_CASE("results are deterministic across calls") {
    Rng rng(5);
    const auto x = rng.gaussian_vector(1001);
    CHECK(simd::dot(x, x) == simd::dot(x, x));
    CHECK(simd::sum_squares(x) == simd::sum_squares(x));
  }
}
