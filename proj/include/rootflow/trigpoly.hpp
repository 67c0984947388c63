#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "rootflow/error.hpp"
#include "rootflow/newton.hpp"
#include "rootflow/spectral.hpp"
#include "rootflow/summation.hpp"

namespace rootflow {

/// Nonzero real stored as sign and log-magnitude; the leading factor of the
/// k-th derivative grows like n^k and overflows a double quickly.
struct LeadingFactor {
  double log_abs = 0.0;
  int sign = 1;

  static LeadingFactor from_value(double c) {
    if (c == 0.0 || !std::isfinite(c)) throw Error(ErrorKind::domain, "leading factor must be finite and nonzero");
    return {std::log(std::abs(c)), c < 0.0 ? -1 : 1};
  }
  double value() const { return sign * std::exp(log_abs); }

  friend bool operator==(const LeadingFactor&, const LeadingFactor&) = default;
};

/// The 2n distinct roots of c * prod_j sin((x - x_j) / 2), sorted in (-pi, pi],
/// together with the number of differentiations applied so far.
class RootConfiguration {
 public:
  explicit RootConfiguration(std::vector<double> roots, std::size_t step_index = 0,
                             LeadingFactor c = {})
      : roots_(std::move(roots)), step_(step_index), c_(c) {
    if (roots_.size() < 2 || roots_.size() % 2 != 0) {
      throw Error(ErrorKind::domain, "root count must be even and positive");
    }
    for (std::size_t j = 0; j < roots_.size(); ++j) {
      if (!(roots_[j] > -pi && roots_[j] <= pi)) {
        throw Error(ErrorKind::domain, "root " + std::to_string(j) + " outside (-pi, pi]");
      }
      if (j > 0 && !(roots_[j] > roots_[j - 1])) {
        throw Error(ErrorKind::domain, "roots must be strictly increasing");
      }
    }
    if (!(gap(size() - 1) > 0.0)) throw Error(ErrorKind::domain, "wraparound gap must be positive");
  }

  /// Wraps every angle to (-pi, pi] and sorts.
  static RootConfiguration from_angles(std::vector<double> angles, std::size_t step_index = 0,
                                       LeadingFactor c = {}) {
    for (double& a : angles) a = wrap_angle(a);
    std::sort(angles.begin(), angles.end());
    return RootConfiguration(std::move(angles), step_index, c);
  }

  /// 2n equally spaced roots -pi + (j + offset) pi / n, j = 0..2n-1.
  static RootConfiguration lattice(std::size_t n, double offset = 1.0) {
    std::vector<double> r(2 * n);
    for (std::size_t j = 0; j < 2 * n; ++j) {
      r[j] = -pi + (static_cast<double>(j) + offset) * pi / static_cast<double>(n);
    }
    return from_angles(std::move(r));
  }

  std::size_t size() const { return roots_.size(); }
  std::size_t n() const { return roots_.size() / 2; }
  std::span<const double> roots() const { return roots_; }
  double operator[](std::size_t j) const { return roots_[j]; }
  std::size_t step_index() const { return step_; }
  double time() const { return static_cast<double>(step_) / static_cast<double>(size()); }
  const LeadingFactor& leading_factor() const { return c_; }

  /// x_{j+1}, lifted by 2 pi for the wraparound gap.
  double next_root(std::size_t j) const {
    return j + 1 < size() ? roots_[j + 1] : roots_[0] + two_pi;
  }
  double gap(std::size_t j) const { return next_root(j) - roots_[j]; }
  double midpoint(std::size_t j) const { return wrap_angle(roots_[j] + 0.5 * gap(j)); }
  double min_gap() const {
    double g = gap(0);
    for (std::size_t j = 1; j < size(); ++j) g = std::min(g, gap(j));
    return g;
  }

  friend bool operator==(const RootConfiguration&, const RootConfiguration&) = default;

 private:
  std::vector<double> roots_;
  std::size_t step_ = 0;
  LeadingFactor c_;
};

/// sum_j cot((y - x_j) / 2), differences reduced to (-pi, pi]. This is
/// 2 p'(y) / p(y) for p in root form.
inline double log_derivative_sum(const RootConfiguration& cfg, double y) {
  CompensatedSum acc;
  for (double xj : cfg.roots()) {
    const double d = wrap_angle(y - xj);
    if (std::abs(d) < 1e-15) throw Error(ErrorKind::pole, "evaluation point coincides with a root");
    acc += 1.0 / std::tan(0.5 * d);
  }
  return acc.value();
}

/// c * prod_j sin((x - x_j) / 2); log-magnitude accumulation above 64 roots.
inline double evaluate_product(const RootConfiguration& cfg, double x) {
  const auto& c = cfg.leading_factor();
  if (cfg.size() <= 64) {
    double p = c.value();
    for (double xj : cfg.roots()) p *= std::sin(0.5 * (x - xj));
    return p;
  }
  CompensatedSum log_abs(c.log_abs);
  int sign = c.sign;
  for (double xj : cfg.roots()) {
    const double s = std::sin(0.5 * (x - xj));
    if (s == 0.0) return 0.0;
    if (s < 0.0) sign = -sign;
    log_abs += std::log(std::abs(s));
  }
  return sign * std::exp(log_abs.value());
}

namespace detail {

// Half-angle sines and cosines of the roots, so that cot((y - x_j) / 2) costs
// one division per term inside the Newton loop.
struct HalfAngleTable {
  std::vector<double> s, c;
  explicit HalfAngleTable(std::span<const double> roots) : s(roots.size()), c(roots.size()) {
    for (std::size_t j = 0; j < roots.size(); ++j) {
      s[j] = std::sin(0.5 * roots[j]);
      c[j] = std::cos(0.5 * roots[j]);
    }
  }
};

// Solves sum_j cot((y - x_j)/2) = 0 on gap m. The cotangents of the two gap
// endpoints are evaluated from exact differences; the rest use the table.
inline RootResult solve_gap(const RootConfiguration& cfg, const HalfAngleTable& tab,
                            std::size_t m) {
  const std::size_t size = cfg.size();
  const std::size_t m1 = (m + 1) % size;
  const double left = cfg[m];
  const double right = cfg.next_root(m);
  const double g = right - left;

  auto eval = [&](double y) {
    const double sy = std::sin(0.5 * y);
    const double cy = std::cos(0.5 * y);
    CompensatedSum f;
    CompensatedSum df;
    for (std::size_t j = 0; j < size; ++j) {
      if (j == m || j == m1) continue;
      const double sn = sy * tab.c[j] - cy * tab.s[j];
      const double cs = cy * tab.c[j] + sy * tab.s[j];
      const double ct = cs / sn;
      f += ct;
      df += 1.0 + ct * ct;
    }
    const double ct_l = 1.0 / std::tan(0.5 * (y - left));
    const double ct_r = 1.0 / std::tan(0.5 * (y - right));
    f += ct_l;
    f += ct_r;
    df += 1.0 + ct_l * ct_l;
    df += 1.0 + ct_r * ct_r;
    return std::pair{f.value(), -0.5 * df.value()};
  };

  double lo = left + 1e-6 * g;
  double hi = right - 1e-6 * g;
  const double mid = 0.5 * (left + right);
  const auto [r, dr] = eval(mid);
  // Each cotangent carries a rounding error of order eps * csc^2, so |f'|
  // sets the floor below which f cannot be resolved.
  NewtonOptions opt;
  opt.value_tol = 16.0 * std::numeric_limits<double>::epsilon() * std::abs(dr);
  opt.step_tol = 1e-13 * std::max(1.0, g);
  opt.max_iterations = 200;
  if (std::abs(r) <= opt.value_tol) return {mid, 1, true};
  if (r > 0.0) {
    lo = std::max(lo, mid);
  } else {
    hi = std::min(hi, mid);
  }
  // At the midpoint the endpoint cotangents cancel, so f(mid) is the smooth
  // remainder R. Solving cot(a) + cot(a - g/2) = -R in closed form gives the
  // starting guess mid + theta.
  const double rad = std::sqrt(4.0 + r * r);
  const double theta = std::atan2(r, 2.0) + std::asin(-r * std::cos(0.5 * g) / rad);
  auto res = safeguarded_newton(eval, lo, hi, mid + theta, false, opt);
  res.iterations += 1;
  return res;
}

}  // namespace detail

/// Roots of p' indexed by gap: entry m lies in (x_m, x_{m+1}), with the
/// wraparound entry lifted past pi when it falls there.
inline std::vector<double> derivative_roots_by_gap(const RootConfiguration& cfg) {
  if (cfg.min_gap() < 1e-12) {
    throw Error(ErrorKind::degenerate, "cyclic gap below 1e-12; roots too clustered to resolve");
  }
  const detail::HalfAngleTable tab(cfg.roots());
  std::vector<double> y(cfg.size());
  for (std::size_t m = 0; m < cfg.size(); ++m) {
    const auto r = detail::solve_gap(cfg, tab, m);
    if (!r.converged) {
      throw Error(ErrorKind::non_convergence,
                  "derivative root solve failed in gap " + std::to_string(m));
    }
    y[m] = r.x;
  }
  return y;
}

/// Leading factor of p' from that of p: matching the e^{inx} coefficients
/// gives c' = i n c exp(i (sum y - sum x) / 2), which is real, so
/// c' = -n c sin((sum y - sum x) / 2) with the sine equal to +-1.
inline LeadingFactor derivative_leading_factor(const RootConfiguration& cfg,
                                               std::span<const double> new_roots) {
  CompensatedSum phase;
  for (double y : new_roots) phase += y;
  for (double x : cfg.roots()) phase += -x;
  const double s = std::sin(0.5 * phase.value());
  LeadingFactor c = cfg.leading_factor();
  c.log_abs += std::log(static_cast<double>(cfg.n()));
  if (s > 0.0) c.sign = -c.sign;
  return c;
}

/// One differentiation step: the 2n interlacing roots of p'.
inline RootConfiguration differentiate_roots(const RootConfiguration& cfg) {
  auto y = derivative_roots_by_gap(cfg);
  for (double& v : y) v = wrap_angle(v);
  std::sort(y.begin(), y.end());
  const auto c = derivative_leading_factor(cfg, y);
  return RootConfiguration(std::move(y), cfg.step_index() + 1, c);
}

/// For `next = differentiate_roots(cfg)`, returns the entry of `next` lying
/// in gap m of cfg, lifted into (x_m, x_{m+1}).
inline double root_in_gap(const RootConfiguration& cfg, const RootConfiguration& next,
                          std::size_t m) {
  const std::size_t size = cfg.size();
  // Either y_m = next[m] or the wraparound root became next[0].
  const std::size_t shift = next[0] > cfg[0] ? 0 : 1;
  double y = next[(m + shift) % size];
  if (y <= cfg[m]) y += two_pi;
  return y;
}

/// Checks x_m < y_m < x_{m+1} cyclically for every gap.
inline bool interlaces(const RootConfiguration& cfg, const RootConfiguration& next) {
  if (cfg.size() != next.size()) return false;
  for (std::size_t m = 0; m < cfg.size(); ++m) {
    const double y = root_in_gap(cfg, next, m);
    if (!(y > cfg[m] && y < cfg.next_root(m))) return false;
  }
  return true;
}

}  // namespace rootflow
