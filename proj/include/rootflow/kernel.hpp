#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "rootflow/coupling.hpp"
#include "rootflow/error.hpp"
#include "rootflow/spectral.hpp"
#include "rootflow/summation.hpp"
#include "rootflow/trigpoly.hpp"

namespace rootflow {

/// Coefficients kappa(j, m), j != m, of the leading-order error propagation
/// operator (L E)_m = sum_{j != m} kappa(j, m) (E_j - E_m).
struct KernelRow {
  std::size_t m = 0;
  std::vector<double> kappa;  // indexed by j; kappa[m] is unused and left at 0
  double row_sum = 0.0;
  double a = 0.0;             // arccot(Hu/u) at the gap midpoint xbar_m
};

/// kappa(j, m) = 1 / (16 pi^2 n^2 (u^2 + Hu^2) sin^2((y_m - x_j) / 2)) with u, Hu
/// at x_m and y_m the root of the next configuration inside gap m.
inline KernelRow kappa_row(const RootConfiguration& roots, const RootConfiguration& next,
                           const CouplingField& field, std::size_t m) {
  const std::size_t size = roots.size();
  if (next.size() != size || m >= size) throw Error(ErrorKind::domain, "kappa_row: inconsistent sizes");
  const double n = static_cast<double>(roots.n());
  const double u = field.u(roots[m]);
  const double hu = field.hu(roots[m]);
  const double inv_scale = 1.0 / (16.0 * pi * pi * n * n * (u * u + hu * hu));
  const double y = root_in_gap(roots, next, m);

  KernelRow row;
  row.m = m;
  row.kappa.assign(size, 0.0);
  CompensatedSum sum;
  for (std::size_t j = 0; j < size; ++j) {
    if (j == m) continue;
    const double d = wrap_angle(y - roots[j]);
    if (std::abs(d) < 1e-15) throw Error(ErrorKind::pole, "kappa_row: derivative root meets a root");
    const double s = std::sin(0.5 * d);
    row.kappa[j] = inv_scale / (s * s);
    sum += row.kappa[j];
  }
  row.row_sum = sum.value();
  const double xbar = roots.midpoint(m);
  row.a = arccot(field.hu(xbar) / field.u(xbar));
  return row;
}

inline KernelRow kappa_row(const RootConfiguration& roots, const RootConfiguration& next,
                           const GridFunction& u, std::size_t m) {
  return kappa_row(roots, next, CouplingField(u), m);
}

/// Row-sum majorant F(a) = sin^2(a) (1/3 + 1/a^2), decreasing on (0, pi).
inline double f_bound(double a) {
  if (!(a > 0.0 && a <= pi)) throw Error(ErrorKind::domain, "F(a) requires 0 < a < pi");
  const double s = std::sin(a);
  return s * s * (1.0 / 3.0 + 1.0 / (a * a));
}

/// sum_j E_j u(xbar_j); small when the roots and the density carry the same mass.
inline double mean_compatibility(const ErrorVector& e, const SpectralInterpolant& u) {
  if (e.entries.size() != e.midpoints.size()) throw Error(ErrorKind::domain, "inconsistent error vector");
  CompensatedSum acc;
  for (std::size_t j = 0; j < e.entries.size(); ++j) acc += e.entries[j] * u(e.midpoints[j]);
  return acc.value();
}

inline double mean_compatibility(const ErrorVector& e, const GridFunction& u) {
  return mean_compatibility(e, SpectralInterpolant(u));
}

inline std::size_t cyclic_distance(std::size_t i, std::size_t j, std::size_t size) {
  const std::size_t d = i > j ? i - j : j - i;
  return std::min(d, size - d);
}

/// Tightest c1, c2 with c1 / d^2 <= kappa(j, m) <= c2 / d^2 over the given
/// rows, d the cyclic index distance.
struct EnvelopeBounds {
  double c1 = 1e300;
  double c2 = 0.0;
  double ratio() const { return c2 / c1; }
};

inline void accumulate_envelope(EnvelopeBounds& env, const KernelRow& row) {
  const std::size_t size = row.kappa.size();
  for (std::size_t j = 0; j < size; ++j) {
    if (j == row.m) continue;
    const double d = static_cast<double>(cyclic_distance(j, row.m, size));
    const double scaled = row.kappa[j] * d * d;
    env.c1 = std::min(env.c1, scaled);
    env.c2 = std::max(env.c2, scaled);
  }
}

}  // namespace rootflow
