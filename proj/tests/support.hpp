#pragma once

// Generators and brute-force oracles shared by the test suites. Nothing here
// calls into the code paths it is used to check.

#include <algorithm>
#include <cmath>
#include <quadmath.h>
#include <cstdint>
#include <utility>
#include <random>
#include <vector>

#include "rootflow/spectral.hpp"
#include "rootflow/trigpoly.hpp"

namespace rootflow::testing {

/// 2n roots: a lattice with each point jittered by up to `jitter` of the
/// spacing, then rotated by a random angle.
inline RootConfiguration jittered_lattice(std::size_t n, std::mt19937_64& rng, double jitter = 0.35) {
  std::uniform_real_distribution<double> off(-jitter, jitter);
  std::uniform_real_distribution<double> rot(-pi, pi);
  const double shift = rot(rng);
  std::vector<double> x(2 * n);
  for (std::size_t j = 0; j < 2 * n; ++j) {
    x[j] = shift + (static_cast<double>(j) + 0.5 + off(rng)) * pi / static_cast<double>(n);
  }
  return RootConfiguration::from_angles(std::move(x));
}

/// 2n i.i.d. uniform angles, redrawn until every cyclic gap exceeds min_gap.
inline RootConfiguration uniform_random_roots(std::size_t n, std::mt19937_64& rng, double min_gap) {
  std::uniform_real_distribution<double> ang(-pi, pi);
  for (;;) {
    std::vector<double> x(2 * n);
    for (double& v : x) v = ang(rng);
    const auto cfg = RootConfiguration::from_angles(std::move(x));
    if (cfg.min_gap() > min_gap) return cfg;
  }
}

/// Coefficients of a random positive trigonometric polynomial
/// c0 + sum_{k=1}^{K} (a_k cos kx + b_k sin kx) with sum |a_k| + |b_k| <= 0.9 c0.
struct BandLimited {
  double c0 = 1.0;
  std::vector<double> a, b;  // index k - 1

  double operator()(double x) const {
    double v = c0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      const double kx = static_cast<double>(k + 1) * x;
      v += a[k] * std::cos(kx) + b[k] * std::sin(kx);
    }
    return v;
  }
  double derivative(double x) const {
    double v = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      const double kk = static_cast<double>(k + 1);
      v += kk * (-a[k] * std::sin(kk * x) + b[k] * std::cos(kk * x));
    }
    return v;
  }
  GridFunction sample(std::size_t n) const {
    return GridFunction::from_function(n, [this](double x) { return (*this)(x); });
  }
};

inline BandLimited random_band_limited(std::mt19937_64& rng, int max_modes = 8) {
  std::uniform_int_distribution<int> modes(1, max_modes);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::uniform_real_distribution<double> level(0.2, 3.0);
  BandLimited f;
  const int k = modes(rng);
  double total = 0.0;
  for (int i = 0; i < k; ++i) {
    f.a.push_back(coef(rng) / (i + 1));
    f.b.push_back(coef(rng) / (i + 1));
    total += std::abs(f.a.back()) + std::abs(f.b.back());
  }
  f.c0 = level(rng);
  const double scale = 0.9 * f.c0 / total;
  for (auto& v : f.a) v *= scale;
  for (auto& v : f.b) v *= scale;
  return f;
}

/// Same, normalized to unit mass on the circle.
inline BandLimited random_unit_mass_density(std::mt19937_64& rng, int max_modes = 4) {
  BandLimited f = random_band_limited(rng, max_modes);
  const double s = 1.0 / (two_pi * f.c0);
  f.c0 *= s;
  for (auto& v : f.a) v *= s;
  for (auto& v : f.b) v *= s;
  return f;
}

/// Trigonometric coefficients of c * prod_j sin((x - x_j) / 2) in quad
/// precision, from a direct DFT of 16n product samples. Inside root clusters
/// |p| can sit ten or more orders below its maximum, which the coefficient
/// form only resolves with this much headroom.
struct ExtendedCoefficients {
  std::vector<__float128> a, b;  // index 0..n, b[0] unused

  std::pair<__float128, __float128> value_and_derivative(double x) const {
    const __float128 c1 = cosq(x), s1 = sinq(x);
    __float128 ck = 1, sk = 0, p = a[0], dp = 0;
    for (std::size_t k = 1; k < a.size(); ++k) {
      const __float128 c = ck * c1 - sk * s1;
      sk = sk * c1 + ck * s1;
      ck = c;
      const __float128 kk = static_cast<__float128>(k);
      p += a[k] * ck + b[k] * sk;
      dp += kk * (b[k] * ck - a[k] * sk);
    }
    return {p, dp};
  }
};

inline ExtendedCoefficients extended_coefficients(const RootConfiguration& cfg) {
  const std::size_t n = cfg.n();
  const std::size_t m = std::max<std::size_t>(16 * n, 32);
  const __float128 two_pi_q = 2 * M_PIq;
  const __float128 scale = cfg.leading_factor().sign * expq(cfg.leading_factor().log_abs);
  std::vector<__float128> cos_t(m), sin_t(m), samples(m);
  for (std::size_t r = 0; r < m; ++r) {
    const __float128 ang = two_pi_q * static_cast<__float128>(r) / static_cast<__float128>(m);
    cos_t[r] = cosq(ang);
    sin_t[r] = sinq(ang);
  }
  for (std::size_t q = 0; q < m; ++q) {
    const __float128 x = two_pi_q * static_cast<__float128>(q) / static_cast<__float128>(m);
    __float128 prod = scale;
    for (double xj : cfg.roots()) prod *= sinq((x - static_cast<__float128>(xj)) / 2);
    samples[q] = prod;
  }
  ExtendedCoefficients ec{std::vector<__float128>(n + 1, 0), std::vector<__float128>(n + 1, 0)};
  for (std::size_t k = 0; k <= n; ++k) {
    __float128 ak = 0, bk = 0;
    for (std::size_t q = 0; q < m; ++q) {
      const std::size_t r = (k * q) % m;
      ak += samples[q] * cos_t[r];
      bk += samples[q] * sin_t[r];
    }
    const __float128 w = static_cast<__float128>(k == 0 ? 1 : 2) / static_cast<__float128>(m);
    ec.a[k] = ak * w;
    ec.b[k] = bk * w;
  }
  return ec;
}

/// Plain bisection for an increasing function on [lo, hi].
template <class F>
double bisect_increasing(F&& f, double target, double lo, double hi) {
  for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Cumulative distribution of (1 + A cos x) / (2 pi) from -pi, in closed form.
inline double cosine_cdf(double amplitude, double x) {
  return (x + pi + amplitude * std::sin(x)) / two_pi;
}

/// Cyclic distance between two angles.
inline double angle_distance(double a, double b) { return std::abs(wrap_angle(a - b)); }

}  // namespace rootflow::testing
