#pragma once

// Coefficient-space view of root-form trigonometric polynomials. Kept apart
// from the cotangent machinery in trigpoly.hpp so that it can serve as an
// independent check of it.

#include <bit>
#include <cmath>
#include <numbers>
#include <complex>
#include <cstddef>
#include <vector>

#include "rootflow/error.hpp"
#include "rootflow/fft.hpp"
#include "rootflow/trigpoly.hpp"

namespace rootflow {

/// p(x) = a_0 + sum_{k=1}^{n} a_k cos(kx) + b_k sin(kx).
struct TrigCoefficients {
  std::vector<double> a;  // a[0..n]
  std::vector<double> b;  // b[0] unused

  std::size_t degree() const { return a.size() - 1; }

  double operator()(double x) const {
    double s = a[0];
    for (std::size_t k = 1; k < a.size(); ++k) {
      const double kx = static_cast<double>(k) * x;
      s += a[k] * std::cos(kx) + b[k] * std::sin(kx);
    }
    return s;
  }

  TrigCoefficients derivative() const {
    TrigCoefficients d{std::vector<double>(a.size(), 0.0), std::vector<double>(b.size(), 0.0)};
    for (std::size_t k = 1; k < a.size(); ++k) {
      const double kk = static_cast<double>(k);
      d.a[k] = kk * b[k];
      d.b[k] = -kk * a[k];
    }
    return d;
  }
};

/// Fourier coefficients of the root-form polynomial, from samples on a grid
/// of at least 16n points.
inline TrigCoefficients to_coefficients(const RootConfiguration& cfg) {
  const std::size_t n = cfg.n();
  const std::size_t m = std::bit_ceil(std::max<std::size_t>(16 * n, 32));
  std::vector<double> samples(m);
  for (std::size_t q = 0; q < m; ++q) {
    samples[q] = evaluate_product(cfg, two_pi * static_cast<double>(q) / static_cast<double>(m));
  }
  const auto spec = fft::forward(samples);
  const double inv = 1.0 / static_cast<double>(m);
  TrigCoefficients tc{std::vector<double>(n + 1), std::vector<double>(n + 1, 0.0)};
  tc.a[0] = spec[0].real() * inv;
  for (std::size_t k = 1; k <= n; ++k) {
    tc.a[k] = 2.0 * spec[k].real() * inv;
    tc.b[k] = -2.0 * spec[k].imag() * inv;
  }
  return tc;
}

namespace detail {

// Coefficients of p' in extended precision, by a direct DFT of product-form
// samples. Clustered roots make p' tiny next to its coefficients, so double
// coefficients would cap the root accuracy well above round-off.
struct ExtendedDerivative {
  std::vector<long double> a, b;  // index k = 1..n

  long double operator()(double x) const {
    const long double c1 = std::cos(static_cast<long double>(x));
    const long double s1 = std::sin(static_cast<long double>(x));
    long double ck = 1.0L, sk = 0.0L, sum = 0.0L;
    for (std::size_t k = 1; k < a.size(); ++k) {
      const long double c = ck * c1 - sk * s1;
      sk = sk * c1 + ck * s1;
      ck = c;
      sum += a[k] * ck + b[k] * sk;
    }
    return sum;
  }
};

inline ExtendedDerivative extended_derivative(const RootConfiguration& cfg) {
  const std::size_t n = cfg.n();
  const std::size_t m = std::bit_ceil(std::max<std::size_t>(16 * n, 32));
  std::vector<long double> cos_t(m), sin_t(m), samples(m);
  for (std::size_t r = 0; r < m; ++r) {
    const long double ang = 2.0L * std::numbers::pi_v<long double> * static_cast<long double>(r) /
                            static_cast<long double>(m);
    cos_t[r] = std::cos(ang);
    sin_t[r] = std::sin(ang);
  }
  for (std::size_t q = 0; q < m; ++q) {
    const long double x = 2.0L * std::numbers::pi_v<long double> * static_cast<long double>(q) /
                          static_cast<long double>(m);
    long double prod = 1.0L;
    for (double xj : cfg.roots()) prod *= std::sin(0.5L * (x - static_cast<long double>(xj)));
    samples[q] = prod;
  }
  ExtendedDerivative d{std::vector<long double>(n + 1, 0.0L), std::vector<long double>(n + 1, 0.0L)};
  for (std::size_t k = 1; k <= n; ++k) {
    long double ak = 0.0L, bk = 0.0L;
    for (std::size_t q = 0; q < m; ++q) {
      const std::size_t r = (k * q) % m;
      ak += samples[q] * cos_t[r];
      bk += samples[q] * sin_t[r];
    }
    ak *= 2.0L / static_cast<long double>(m);
    bk *= 2.0L / static_cast<long double>(m);
    const long double kk = static_cast<long double>(k);
    d.a[k] = kk * bk;
    d.b[k] = -kk * ak;
  }
  return d;
}

}  // namespace detail

/// Roots of p' found without the cotangent identity: coefficient-wise
/// differentiation in extended precision, a dense sign scan and bisection. Intended for small
/// instances (2n <= 512).
inline RootConfiguration derivative_roots_oracle(const RootConfiguration& cfg) {
  if (cfg.size() > 512) throw Error(ErrorKind::domain, "oracle limited to 2n <= 512");
  const std::size_t n = cfg.n();
  // Roots do not depend on the leading factor, which the samples omit.
  const detail::ExtendedDerivative dp = detail::extended_derivative(cfg);

  std::size_t scan = std::bit_ceil(64 * cfg.size());
  for (int attempt = 0; attempt < 3; ++attempt, scan *= 2) {
    fft::Spectrum spec(scan / 2 + 1);
    for (std::size_t k = 1; k <= n; ++k) {
      spec[k] = 0.5 * static_cast<double>(scan) *
                std::complex<double>(static_cast<double>(dp.a[k]), -static_cast<double>(dp.b[k]));
    }
    const auto vals = fft::inverse(spec, scan);
    const double h = two_pi / static_cast<double>(scan);

    std::vector<double> roots;
    for (std::size_t q = 0; q < scan; ++q) {
      const double v0 = vals[q];
      const double v1 = vals[(q + 1) % scan];
      if ((v0 >= 0.0) == (v1 >= 0.0)) continue;
      double lo = static_cast<double>(q) * h;
      double hi = lo + h;
      const bool rising = v0 < 0.0;
      for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((dp(mid) < 0.0) == rising) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    if (roots.size() == cfg.size()) {
      return RootConfiguration::from_angles(std::move(roots), cfg.step_index() + 1);
    }
  }
  throw Error(ErrorKind::non_convergence,
              "oracle sign scan did not isolate 2n roots of p'");
}

}  // namespace rootflow
