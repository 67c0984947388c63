#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "rootflow/experiment.hpp"
#include "rootflow/kernel.hpp"

using namespace rootflow;

namespace {

struct LatticeCase {
  std::size_t n;
  RootConfiguration roots;
  RootConfiguration next;
  GridFunction u;

  explicit LatticeCase(std::size_t n_, double density = 1.0 / two_pi)
      : n(n_),
        roots(RootConfiguration::lattice(n_, 0.5)),
        next(differentiate_roots(roots)),
        u(GridFunction::constant(256, density)) {}
};

}  // namespace

TEST(FBound, Values) {
  EXPECT_NEAR(f_bound(pi / 2), 1.0 / 3.0 + 4.0 / (pi * pi), 1e-15);
  EXPECT_NEAR(f_bound(pi / 2), 0.7386180679, 1e-10);
  EXPECT_NEAR(f_bound(0.01), 0.99999999933, 1e-10);
  EXPECT_NEAR(f_bound(0.5), 0.99601, 1e-5);
  EXPECT_NEAR(f_bound(1.0), 0.94410, 1e-5);
  EXPECT_NEAR(f_bound(1.5), 0.77389, 1e-5);
  EXPECT_NEAR(f_bound(2.0), 0.48231, 1e-5);
  EXPECT_NEAR(f_bound(3.0), 0.008851, 1e-6);
  EXPECT_NEAR(f_bound(pi), 0.0, 1e-30);
  EXPECT_THROW(f_bound(0.0), Error);
  EXPECT_THROW(f_bound(3.2), Error);
}

TEST(FBound, DecreasingAndBelowOne) {
  double prev = 1.0;
  for (int i = 1; i <= 1000; ++i) {
    const double a = pi * i / 1000.0;
    const double f = f_bound(a);
    EXPECT_LT(f, prev) << "a=" << a;
    if (a >= 0.01) EXPECT_LT(f, 1.0);
    prev = f;
  }
}

TEST(Kappa, LatticeClosedForm) {
  for (std::size_t n : {8u, 32u, 100u}) {
    const LatticeCase c(n);
    const double nn = static_cast<double>(n);
    for (std::size_t m : {std::size_t{0}, n, 2 * n - 1}) {
      const auto row = kappa_row(c.roots, c.next, c.u, m);
      EXPECT_EQ(row.kappa[m], 0.0);
      for (std::size_t d = 1; d < 2 * n; ++d) {
        const std::size_t j = (m + d) % (2 * n);
        const double half = (static_cast<double>(d) - 0.5) * pi / (2.0 * nn);
        const double expected = 1.0 / (4.0 * nn * nn * std::sin(half) * std::sin(half));
        EXPECT_NEAR(row.kappa[j] / expected, 1.0, 1e-11) << "n=" << n << " d=" << d;
      }
      const double far = 1.0 / (4.0 * nn * nn * std::pow(std::sin(3.0 * pi / (4.0 * nn)), 2));
      EXPECT_NEAR(row.kappa[(m + 2 * n - 1) % (2 * n)] / far, 1.0, 1e-11);
      const double s_exact = 1.0 - 1.0 / (4.0 * nn * nn * std::pow(std::sin(pi / (4.0 * nn)), 2));
      EXPECT_NEAR(row.row_sum, s_exact, 1e-12);
      EXPECT_NEAR(row.a, pi / 2, 1e-14);
    }
  }
}

TEST(Kappa, ScalesInverselyWithDensitySquared) {
  const LatticeCase a(16), b(16, 3.0 / two_pi);
  const auto ra = kappa_row(a.roots, a.next, a.u, 5);
  const auto rb = kappa_row(b.roots, b.next, b.u, 5);
  for (std::size_t j = 0; j < ra.kappa.size(); ++j) EXPECT_NEAR(rb.kappa[j], ra.kappa[j] / 9.0, 1e-15);
}

TEST(Kappa, EnvelopeOfLatticeIsNine) {
  const LatticeCase c(64);
  EnvelopeBounds env;
  for (std::size_t m = 0; m < c.roots.size(); ++m) accumulate_envelope(env, kappa_row(c.roots, c.next, c.u, m));
  EXPECT_NEAR(env.ratio(), 9.0, 0.05);
}

TEST(Kappa, CosineDensityRowsBelowBound) {
  ExperimentConfig cfg;
  cfg.n = 64;
  cfg.t_final = 0.0;
  const auto series = run_coupled(cfg, [&](const CheckpointView& v) {
    for (std::size_t m = 0; m < v.roots.size(); ++m) {
      const auto row = kappa_row(v.roots, v.next, v.field, m);
      EXPECT_LT(row.row_sum, 1.0);
      EXPECT_LE(row.row_sum - f_bound(row.a), 0.15);
      for (std::size_t j = 0; j < row.kappa.size(); ++j) {
        if (j != m) EXPECT_GT(row.kappa[j], 0.0);
      }
    }
  });
  EXPECT_FALSE(series.aborted);
}

TEST(CyclicDistance, Wraps) {
  EXPECT_EQ(cyclic_distance(0, 9, 10), 1u);
  EXPECT_EQ(cyclic_distance(2, 7, 10), 5u);
  EXPECT_EQ(cyclic_distance(4, 4, 10), 0u);
}

TEST(MeanCompatibility, LatticeAndQuantiles) {
  const LatticeCase c(16);
  EXPECT_LT(std::abs(mean_compatibility(error_vector(c.roots, c.u), c.u)), 1e-14);
  const auto u = GridFunction::from_function(512, [](double x) { return (1.0 + 0.5 * std::cos(x)) / two_pi; });
  const double small = std::abs(mean_compatibility(error_vector(quantile_init(u, 64), u), u));
  const double large = std::abs(mean_compatibility(error_vector(quantile_init(u, 16), u), u));
  EXPECT_LT(small, large);
}
