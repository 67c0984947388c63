#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "rootflow/error.hpp"
#include "rootflow/spectral.hpp"
#include "rootflow/trigpoly.hpp"

namespace rootflow {

/// Interpolants of a density and of its Hilbert transform, evaluated at
/// root midpoints many times per step.
struct CouplingField {
  SpectralInterpolant u;
  SpectralInterpolant hu;
  double u_sup;

  explicit CouplingField(const GridFunction& density)
      : u(density), hu(hilbert(density)), u_sup(density.sup_norm()) {}
};

/// Deviation of the root gaps from the density prediction,
/// E_j = x_{j+1} - x_j - 1 / (2 n u(xbar_j)).
struct ErrorVector {
  std::vector<double> entries;
  std::vector<double> midpoints;  // reduced to (-pi, pi]
  std::vector<double> gaps;

  double sup_norm() const {
    double s = 0.0;
    for (double e : entries) s = std::max(s, std::abs(e));
    return s;
  }
};

inline ErrorVector error_vector(const RootConfiguration& cfg, const SpectralInterpolant& u) {
  const std::size_t size = cfg.size();
  const double two_n = static_cast<double>(size);
  ErrorVector ev;
  ev.entries.resize(size);
  ev.midpoints.resize(size);
  ev.gaps.resize(size);
  for (std::size_t j = 0; j < size; ++j) {
    ev.gaps[j] = cfg.gap(j);
    ev.midpoints[j] = cfg.midpoint(j);
    const double uj = u(ev.midpoints[j]);
    if (!(uj > 0.0)) throw Error(ErrorKind::positivity_loss, "density non-positive at a midpoint");
    ev.entries[j] = ev.gaps[j] - 1.0 / (two_n * uj);
  }
  return ev;
}

inline ErrorVector error_vector(const RootConfiguration& cfg, const GridFunction& u) {
  if (!(u.min() > 0.0)) throw Error(ErrorKind::positivity_loss, "density must be positive");
  return error_vector(cfg, SpectralInterpolant(u));
}

/// Roots x_j = U^{-1}((j - 1/2) / (2n)), j = 1..2n, for a unit-mass density;
/// each arc between consecutive roots then carries mass 1 / (2n).
inline RootConfiguration quantile_init(const GridFunction& u0, std::size_t n) {
  if (n == 0) throw Error(ErrorKind::domain, "n must be positive");
  const CumulativeDensity cdf(u0);
  if (std::abs(cdf.total_mass() - 1.0) > 1e-10) {
    throw Error(ErrorKind::domain, "quantile initialization needs total mass 1");
  }
  const std::size_t size = 2 * n;
  std::vector<double> x(size);
  for (std::size_t j = 0; j < size; ++j) {
    x[j] = invert_cdf(cdf, (static_cast<double>(j) + 0.5) / static_cast<double>(size));
  }
  return RootConfiguration::from_angles(std::move(x));
}

/// Adds i.i.d. uniform offsets of size at most Z0 n^{-1-eps} to every root.
inline RootConfiguration perturb_roots(const RootConfiguration& cfg, double z0, double eps,
                                       std::uint64_t seed) {
  if (z0 < 0.0 || !(eps > 0.0)) throw Error(ErrorKind::domain, "need Z0 >= 0 and eps > 0");
  if (z0 == 0.0) return cfg;
  const double delta = z0 * std::pow(static_cast<double>(cfg.n()), -1.0 - eps);
  if (!(delta < 0.25 * cfg.min_gap())) {
    throw Error(ErrorKind::domain, "perturbation too large for this n (exceeds a quarter of the minimum gap)");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> offset(-delta, delta);
  std::vector<double> x(cfg.roots().begin(), cfg.roots().end());
  for (double& v : x) v += offset(rng);
  return RootConfiguration::from_angles(std::move(x), cfg.step_index(), cfg.leading_factor());
}

struct GapSplit {
  double lower;  // predicted y_m - x_m
  double upper;  // predicted x_{m+1} - y_m
};

/// arccot on the (0, pi) branch.
inline double arccot(double z) { return 0.5 * pi - std::atan(z); }

/// Leading-order position of the derivative root inside gap m:
/// y_m - x_m = arccot(-Hu/u) / (2 pi n u), x_{m+1} - y_m = arccot(Hu/u) / (2 pi n u),
/// with u and Hu taken at the gap midpoint.
inline GapSplit split_from_values(double u, double hu, std::size_t n) {
  const double z = hu / u;
  const double scale = 1.0 / (two_pi * static_cast<double>(n) * u);
  return {arccot(-z) * scale, arccot(z) * scale};
}

inline GapSplit predict_gap_split(const RootConfiguration& cfg, const CouplingField& field,
                                  std::size_t m) {
  const double xbar = cfg.midpoint(m);
  return split_from_values(field.u(xbar), field.hu(xbar), cfg.n());
}

inline GapSplit predict_gap_split(const RootConfiguration& cfg, const GridFunction& u,
                                  std::size_t m) {
  return predict_gap_split(cfg, CouplingField(u), m);
}

/// max_m |(y_m - x_m) - predicted lower sub-gap|.
inline double prediction_residual(const RootConfiguration& cfg, const RootConfiguration& next,
                                  const CouplingField& field) {
  double worst = 0.0;
  for (std::size_t m = 0; m < cfg.size(); ++m) {
    const double actual = root_in_gap(cfg, next, m) - cfg[m];
    worst = std::max(worst, std::abs(actual - predict_gap_split(cfg, field, m).lower));
  }
  return worst;
}

/// Ratios of observed root separations to the lower bounds
/// |y_m - x_j| >= |m - j| / (8 |u|_inf n) (j != m, m+1) and
/// min(y_m - x_m, x_{m+1} - y_m) >= c / (2n), c the sub-gap constant from the
/// arccot prediction. Both minima must be >= 1.
struct GapBoundRatios {
  double far = 0.0;
  double near = 0.0;
};

inline GapBoundRatios gap_bound_ratios(const RootConfiguration& cfg, const RootConfiguration& next,
                                       const CouplingField& field) {
  const std::size_t size = cfg.size();
  const double n = static_cast<double>(cfg.n());
  GapBoundRatios r{1e300, 1e300};
  for (std::size_t m = 0; m < size; ++m) {
    const double y = root_in_gap(cfg, next, m);
    for (std::size_t off = 2; off < size; ++off) {
      const std::size_t j = (m + off) % size;
      double dist;
      double count;
      if (off <= size / 2) {
        double xj = cfg[j];
        while (xj < y) xj += two_pi;
        dist = xj - y;
        count = static_cast<double>(off);
      } else {
        double xj = cfg[j];
        while (xj > y) xj -= two_pi;
        dist = y - xj;
        count = static_cast<double>(size - off);
      }
      r.far = std::min(r.far, dist / (count / (8.0 * field.u_sup * n)));
    }
    const double xbar = cfg.midpoint(m);
    const double u = field.u(xbar);
    const double a = arccot(field.hu(xbar) / u);
    const double c = std::min(a, pi - a) / (two_pi * u);
    const double sub = std::min(y - cfg[m], cfg.next_root(m) - y);
    r.near = std::min(r.near, sub / (0.5 * c / n));
  }
  return r;
}

}  // namespace rootflow
