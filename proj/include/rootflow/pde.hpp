#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "rootflow/error.hpp"
#include "rootflow/spectral.hpp"

namespace rootflow {

struct PdeState {
  GridFunction u;
  double t = 0.0;
};

struct ObservableRecord {
  double t = 0.0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  double amplitude = 0.0;                  // V = max - min
  std::array<double, 3> derivative_sup{};  // |d^k u / dx^k|_inf, k = 1, 2, 3
  double hilbert_sup = 0.0;                // |Hu|_inf
};

namespace detail {

inline void require_positive(const GridFunction& u, const char* where) {
  std::size_t q = u.argmin();
  if (!(u[q] > 0.0)) {
    throw Error(ErrorKind::positivity_loss,
                std::string(where) + ": density non-positive at grid point " + std::to_string(q) +
                    " (value " + std::to_string(u[q]) + ")");
  }
}

}  // namespace detail

/// du/dt = -(1/pi) d/dx arctan(Hu / u), with the flux truncated to
/// |k| <= N/3 before differentiation.
inline GridFunction rhs(const GridFunction& u) {
  detail::require_positive(u, "rhs");
  const GridFunction hu = hilbert(u);
  GridFunction flux = u;
  for (std::size_t q = 0; q < u.size(); ++q) flux[q] = std::atan(hu[q] / u[q]) / pi;
  const std::size_t n = u.size();
  const std::size_t kmax = n / 3;
  return transform_modes(flux, [&](std::size_t k, std::complex<double>& c) {
    if (k > kmax || k == n / 2) {
      c = 0.0;
    } else {
      c *= std::complex<double>(0.0, -static_cast<double>(k));
    }
  });
}

/// Largest stable RK4 step: 0.8 * 2 / lambda_max with
/// lambda_max = (N/2) (1 / (pi min u) + max |Hu / (u^2 + Hu^2)|).
inline double stable_dt(const GridFunction& u) {
  detail::require_positive(u, "stable_dt");
  const GridFunction hu = hilbert(u);
  double psi = 0.0;
  for (std::size_t q = 0; q < u.size(); ++q) {
    psi = std::max(psi, std::abs(hu[q]) / (u[q] * u[q] + hu[q] * hu[q]));
  }
  const double lambda = 0.5 * static_cast<double>(u.size()) * (1.0 / (pi * u.min()) + psi);
  return 0.8 * 2.0 / lambda;
}

/// Classical fourth-order Runge-Kutta step.
inline PdeState step(const PdeState& s, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorKind::domain, "time step must be positive");
  const GridFunction& u = s.u;
  const GridFunction k1 = rhs(u);
  const GridFunction k2 = rhs(u + (0.5 * dt) * k1);
  const GridFunction k3 = rhs(u + (0.5 * dt) * k2);
  const GridFunction k4 = rhs(u + dt * k3);
  GridFunction next = u;
  auto out = next.samples();
  for (std::size_t q = 0; q < out.size(); ++q) {
    out[q] += dt / 6.0 * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q]);
  }
  detail::require_positive(next, "step");
  return {std::move(next), s.t + dt};
}

/// Stateful driver that re-estimates the stable step every 10 steps and
/// shortens the last step so that requested times are hit exactly.
class PdeIntegrator {
 public:
  explicit PdeIntegrator(PdeState s) : state_(std::move(s)) {
    detail::require_positive(state_.u, "initial state");
  }

  const PdeState& state() const { return state_; }
  std::size_t steps_taken() const { return steps_; }

  const PdeState& advance_to(double t_target) {
    if (t_target < state_.t) throw Error(ErrorKind::domain, "cannot integrate backwards in time");
    while (state_.t < t_target) {
      if (steps_ % 10 == 0 || dt_ <= 0.0) dt_ = stable_dt(state_.u);
      const double remaining = t_target - state_.t;
      if (remaining <= dt_) {
        state_ = step(state_, remaining);
        state_.t = t_target;
      } else {
        state_ = step(state_, dt_);
      }
      ++steps_;
    }
    return state_;
  }

 private:
  PdeState state_;
  double dt_ = 0.0;
  std::size_t steps_ = 0;
};

/// Integrates to t_target and returns the states at each checkpoint.
inline std::vector<PdeState> evolve_to(const PdeState& s, double t_target,
                                       const std::vector<double>& checkpoints) {
  if (t_target < s.t) throw Error(ErrorKind::domain, "t_target precedes the current time");
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] < s.t || checkpoints[i] > t_target ||
        (i > 0 && checkpoints[i] < checkpoints[i - 1])) {
      throw Error(ErrorKind::domain, "checkpoints must be sorted within [t, t_target]");
    }
  }
  PdeIntegrator integ(s);
  std::vector<PdeState> out;
  out.reserve(checkpoints.size());
  for (double tc : checkpoints) out.push_back(integ.advance_to(tc));
  integ.advance_to(t_target);
  return out;
}

inline ObservableRecord observables(const PdeState& s) {
  ObservableRecord r;
  r.t = s.t;
  r.mean = s.u.mean();
  r.min = s.u.min();
  r.max = s.u.max();
  r.amplitude = r.max - r.min;
  GridFunction d = s.u;
  for (std::size_t k = 0; k < 3; ++k) {
    d = derivative(d);
    r.derivative_sup[k] = d.sup_norm();
  }
  r.hilbert_sup = hilbert(s.u).sup_norm();
  return r;
}

}  // namespace rootflow
