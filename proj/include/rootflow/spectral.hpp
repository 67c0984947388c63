#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "rootflow/error.hpp"
#include "rootflow/fft.hpp"
#include "rootflow/newton.hpp"
#include "rootflow/summation.hpp"

namespace rootflow {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Reduce an angle to (-pi, pi].
inline double wrap_angle(double x) {
  double r = std::remainder(x, two_pi);  // [-pi, pi]
  if (r <= -pi) r += two_pi;
  return r;
}

/// Real periodic function sampled at theta_q = -pi + 2 pi (q + 1) / N,
/// q = 0..N-1, so the last node sits at pi and node N/2 - 1 at 0.
class GridFunction {
 public:
  GridFunction() = default;

  explicit GridFunction(std::vector<double> samples) : samples_(std::move(samples)) {
    if (samples_.empty() || samples_.size() % 2 != 0) {
      throw Error(ErrorKind::domain,
                  "grid size must be even and positive, got " + std::to_string(samples_.size()));
    }
  }

  template <class F>
  static GridFunction from_function(std::size_t n, F&& f) {
    std::vector<double> s(n);
    for (std::size_t q = 0; q < n; ++q) s[q] = f(node(q, n));
    return GridFunction(std::move(s));
  }

  static GridFunction constant(std::size_t n, double c) {
    return GridFunction(std::vector<double>(n, c));
  }

  static double node(std::size_t q, std::size_t n) {
    return -pi + two_pi * static_cast<double>(q + 1) / static_cast<double>(n);
  }

  std::size_t size() const { return samples_.size(); }
  std::span<const double> samples() const { return samples_; }
  std::span<double> samples() { return samples_; }
  double operator[](std::size_t q) const { return samples_[q]; }
  double& operator[](std::size_t q) { return samples_[q]; }

  double mean() const { return compensated_sum(samples_) / static_cast<double>(size()); }
  double min() const { return *std::min_element(samples_.begin(), samples_.end()); }
  double max() const { return *std::max_element(samples_.begin(), samples_.end()); }
  double sup_norm() const {
    double s = 0.0;
    for (double v : samples_) s = std::max(s, std::abs(v));
    return s;
  }
  std::size_t argmax() const {
    return static_cast<std::size_t>(std::max_element(samples_.begin(), samples_.end()) -
                                    samples_.begin());
  }
  std::size_t argmin() const {
    return static_cast<std::size_t>(std::min_element(samples_.begin(), samples_.end()) -
                                    samples_.begin());
  }

  GridFunction& operator+=(const GridFunction& o) {
    for (std::size_t q = 0; q < size(); ++q) samples_[q] += o.samples_[q];
    return *this;
  }
  GridFunction& operator-=(const GridFunction& o) {
    for (std::size_t q = 0; q < size(); ++q) samples_[q] -= o.samples_[q];
    return *this;
  }
  GridFunction& operator*=(double a) {
    for (double& v : samples_) v *= a;
    return *this;
  }
  friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
  friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
  friend GridFunction operator*(double a, GridFunction f) { return f *= a; }

  friend bool operator==(const GridFunction&, const GridFunction&) = default;

 private:
  std::vector<double> samples_;
};

/// Applies `symbol(k, coefficient)` to every retained Fourier mode
/// k = 0..N/2 of f and transforms back.
template <class Symbol>
GridFunction transform_modes(const GridFunction& f, Symbol&& symbol) {
  auto spec = fft::forward(f.samples());
  for (std::size_t k = 0; k < spec.size(); ++k) symbol(k, spec[k]);
  return GridFunction(fft::inverse(spec, f.size()));
}

enum class Multiplier { hilbert, half_laplacian, derivative };

/// Fourier multipliers: hilbert -i sgn(k), half_laplacian |k|, derivative ik.
/// The Nyquist mode is dropped by the odd symbols and kept by |k|.
inline GridFunction multiplier_transform(const GridFunction& f, Multiplier kind) {
  const std::size_t nyquist = f.size() / 2;
  return transform_modes(f, [&](std::size_t k, std::complex<double>& c) {
    const double kk = static_cast<double>(k);
    switch (kind) {
      case Multiplier::hilbert:
        c = (k == 0 || k == nyquist) ? 0.0 : std::complex<double>(0.0, -1.0) * c;
        break;
      case Multiplier::half_laplacian:
        c *= kk;
        break;
      case Multiplier::derivative:
        c = (k == nyquist) ? 0.0 : std::complex<double>(0.0, kk) * c;
        break;
    }
  });
}

inline GridFunction hilbert(const GridFunction& f) {
  return multiplier_transform(f, Multiplier::hilbert);
}
inline GridFunction half_laplacian(const GridFunction& f) {
  return multiplier_transform(f, Multiplier::half_laplacian);
}
inline GridFunction derivative(const GridFunction& f) {
  return multiplier_transform(f, Multiplier::derivative);
}

/// Zero every mode with |k| > kmax.
inline GridFunction truncate_modes(const GridFunction& f, std::size_t kmax) {
  return transform_modes(f, [&](std::size_t k, std::complex<double>& c) {
    if (k > kmax) c = 0.0;
  });
}

/// Off-grid evaluation of the trigonometric interpolant of a grid function,
/// by direct summation of its Fourier series.
class SpectralInterpolant {
 public:
  explicit SpectralInterpolant(const GridFunction& f)
      : n_(f.size()), origin_(GridFunction::node(0, f.size())) {
    coeffs_ = fft::forward(f.samples());
    const double scale = 1.0 / static_cast<double>(n_);
    for (auto& c : coeffs_) c *= scale;
  }

  /// Series with explicit coefficients c_k (k = 0..N/2), evaluated as
  /// Re[c_0 + 2 sum_{0<k<N/2} c_k e^{ik phi} + c_{N/2} e^{i N/2 phi}],
  /// phi = x - origin.
  SpectralInterpolant(std::vector<std::complex<double>> coeffs, std::size_t n, double origin)
      : n_(n), origin_(origin), coeffs_(std::move(coeffs)) {}

  double operator()(double x) const {
    const double phi = x - origin_;
    const std::size_t kn = coeffs_.size() - 1;
    const std::complex<double> rot(std::cos(phi), std::sin(phi));
    std::complex<double> w = rot;
    CompensatedSum acc(coeffs_[0].real());
    for (std::size_t k = 1; k < kn; ++k) {
      if (k % 64 == 0) {
        const double a = static_cast<double>(k) * phi;
        w = {std::cos(a), std::sin(a)};
      }
      acc += 2.0 * (coeffs_[k].real() * w.real() - coeffs_[k].imag() * w.imag());
      w *= rot;
    }
    if (kn > 0) {
      const double a = static_cast<double>(kn) * phi;
      acc += coeffs_[kn].real() * std::cos(a) - coeffs_[kn].imag() * std::sin(a);
    }
    return acc.value();
  }

  std::size_t grid_size() const { return n_; }
  double origin() const { return origin_; }
  const std::vector<std::complex<double>>& coefficients() const { return coeffs_; }

 private:
  std::size_t n_;
  double origin_;
  std::vector<std::complex<double>> coeffs_;
};

/// Evaluates the trigonometric interpolant of f at an arbitrary angle.
inline double interpolate(const GridFunction& f, double x) { return SpectralInterpolant(f)(x); }

/// U(x) = integral of u from -pi to x for a strictly positive grid density.
class CumulativeDensity {
 public:
  explicit CumulativeDensity(const GridFunction& u) : density_(u), antiderivative_(u) {
    if (u.min() <= 0.0) {
      throw Error(ErrorKind::domain, "cumulative density requires a strictly positive density");
    }
    const auto& c = density_.coefficients();
    mean_ = c[0].real();
    // Antiderivative of the mean-free part: c_k / (ik).
    std::vector<std::complex<double>> d(c.size());
    for (std::size_t k = 1; k < c.size(); ++k) {
      d[k] = c[k] / std::complex<double>(0.0, static_cast<double>(k));
    }
    antiderivative_ = SpectralInterpolant(std::move(d), density_.grid_size(), density_.origin());
    offset_ = antiderivative_(-pi);
  }

  double operator()(double x) const { return mean_ * (x + pi) + antiderivative_(x) - offset_; }
  double density(double x) const { return density_(x); }
  double total_mass() const { return two_pi * mean_; }

 private:
  SpectralInterpolant density_;
  SpectralInterpolant antiderivative_;
  double mean_ = 0.0;
  double offset_ = 0.0;
};

/// Solves U(x) = p for x in [-pi, pi].
inline double invert_cdf(const CumulativeDensity& cdf, double p) {
  const double total = cdf.total_mass();
  if (p < -1e-12 || p > total + 1e-12) {
    throw Error(ErrorKind::domain, "quantile level outside [0, total mass]");
  }
  if (p <= 0.0) return -pi;
  if (p >= total) return pi;
  auto eval = [&](double x) { return std::pair{cdf(x) - p, cdf.density(x)}; };
  const double guess = -pi + two_pi * p / total;
  const auto r = safeguarded_newton(eval, -pi, pi, guess, true,
                                    {.step_tol = 1e-15, .value_tol = 1e-14, .max_iterations = 200});
  if (!r.converged) {
    throw Error(ErrorKind::non_convergence,
                "CDF inversion did not converge in 200 iterations (density not positive?)");
  }
  return r.x;
}

struct ExtremumReport {
  bool vacuous = false;
  double x_max = 0.0;        // location of max f
  double x_min = 0.0;        // location of min f
  double x_vmax = 0.0;       // location of max f'
  double amplitude = 0.0;    // V = max f - min f
  // Residuals oriented so that >= 0 means the inequality holds.
  double frac_lap_at_max = 0.0;  // Lambda f(x_max) - (V/pi) cot(pi (mean - min) / 2V)
  double frac_lap_at_min = 0.0;  // -(V/pi) cot(pi (max - mean) / 2V) - Lambda f(x_min)
  double nmp_lower = 0.0;        // 8 pi V Lambda v(x0) - v(x0)^2
  double hilbert_control = 0.0;  // (16/pi) V Lambda v(x0) - Hv(x0)^2
  double scale_frac_lap = 0.0;
  double scale_nmp = 0.0;
  double scale_hilbert = 0.0;

  bool holds(double rel_tol = 1e-6) const {
    if (vacuous) return true;
    return frac_lap_at_max >= -rel_tol * scale_frac_lap &&
           frac_lap_at_min >= -rel_tol * scale_frac_lap &&
           nmp_lower >= -rel_tol * scale_nmp && hilbert_control >= -rel_tol * scale_hilbert;
  }
};

namespace detail {

// Newton on g' starting at a grid extremum, confined to one cell either side.
inline double refine_extremum(const SpectralInterpolant& dg, const SpectralInterpolant& ddg,
                              double x0, double h) {
  double x = x0;
  for (int it = 0; it < 20; ++it) {
    const double s = ddg(x);
    if (s == 0.0) break;
    const double next = std::clamp(x - dg(x) / s, x0 - h, x0 + h);
    if (std::abs(next - x) < 1e-15) {
      x = next;
      break;
    }
    x = next;
  }
  return x;
}

}  // namespace detail

/// Checks the pointwise maximum-principle inequalities for the fractional
/// Laplacian and Hilbert transform at the extrema of f and of v = f'.
inline ExtremumReport extremum_inequality_check(const GridFunction& f) {
  ExtremumReport rep;
  const double fmax = f.max();
  const double fmin = f.min();
  const double scale = std::max(std::abs(fmax), std::abs(fmin));
  if (fmax - fmin <= 1e-14 * std::max(scale, 1e-300)) {
    rep.vacuous = true;
    return rep;
  }
  const std::size_t n = f.size();
  const double h = two_pi / static_cast<double>(n);

  const GridFunction v = derivative(f);
  const GridFunction dv = derivative(v);
  const GridFunction lam_f = half_laplacian(f);
  const GridFunction lam_v = half_laplacian(v);
  const GridFunction h_v = hilbert(v);

  const SpectralInterpolant fi(f), vi(v), dvi(dv), lam_fi(lam_f), lam_vi(lam_v), h_vi(h_v);
  const SpectralInterpolant ddvi(derivative(dv));

  rep.x_max = detail::refine_extremum(vi, dvi, GridFunction::node(f.argmax(), n), h);
  rep.x_min = detail::refine_extremum(vi, dvi, GridFunction::node(f.argmin(), n), h);
  rep.x_vmax = detail::refine_extremum(dvi, ddvi, GridFunction::node(v.argmax(), n), h);

  const double big_m = std::max(fi(rep.x_max), fmax);
  const double small_m = std::min(fi(rep.x_min), fmin);
  const double mean = f.mean();
  const double amp = big_m - small_m;
  rep.amplitude = amp;

  const double lower_at_max = amp / pi / std::tan(pi * (mean - small_m) / (2.0 * amp));
  const double upper_at_min = -amp / pi / std::tan(pi * (big_m - mean) / (2.0 * amp));
  rep.frac_lap_at_max = lam_fi(rep.x_max) - lower_at_max;
  rep.frac_lap_at_min = upper_at_min - lam_fi(rep.x_min);
  rep.scale_frac_lap = std::max(scale, amp);

  const double v0 = vi(rep.x_vmax);
  const double lv0 = lam_vi(rep.x_vmax);
  const double hv0 = h_vi(rep.x_vmax);
  const double nmp_lhs = 8.0 * pi * amp * lv0;
  const double hc_rhs = 16.0 / pi * amp * lv0;
  rep.nmp_lower = nmp_lhs - v0 * v0;
  rep.hilbert_control = hc_rhs - hv0 * hv0;
  rep.scale_nmp = std::max(std::abs(nmp_lhs), v0 * v0);
  rep.scale_hilbert = std::max(std::abs(hc_rhs), hv0 * hv0);
  return rep;
}

}  // namespace rootflow
