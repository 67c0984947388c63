#pragma once

#include <cmath>
#include <concepts>
#include <utility>

namespace rootflow {

struct RootResult {
  double x = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct NewtonOptions {
  double step_tol = 1e-13;   // stop once |x_{k+1} - x_k| falls below this
  double value_tol = 0.0;    // or once |f(x)| falls below this
  int max_iterations = 200;
};

/// Newton's method for a strictly monotone function on the open bracket
/// (lo, hi) that is known to contain exactly one root. Any Newton iterate
/// that leaves the current bracket is replaced by the bracket midpoint, and
/// the bracket shrinks after every evaluation, so the iteration cannot
/// diverge. `eval` returns (f(x), f'(x)).
template <class Eval>
  requires std::invocable<Eval&, double>
RootResult safeguarded_newton(Eval&& eval, double lo, double hi, double x0,
                              bool increasing, const NewtonOptions& opt = {}) {
  double x = (x0 > lo && x0 < hi) ? x0 : 0.5 * (lo + hi);
  for (int it = 1; it <= opt.max_iterations; ++it) {
    const auto [fx, dfx] = eval(x);
    if (fx == 0.0 || std::abs(fx) <= opt.value_tol) return {x, it, true};

    // Root lies to the right of x iff f(x) < 0 for increasing f.
    if ((fx < 0.0) == increasing) {
      lo = x;
    } else {
      hi = x;
    }

    double next = x - fx / dfx;
    const bool slope_ok = increasing ? dfx > 0.0 : dfx < 0.0;
    if (!slope_ok || !std::isfinite(next) || next <= lo || next >= hi) {
      next = 0.5 * (lo + hi);
    }
    const double step = std::abs(next - x);
    x = next;
    if (step < opt.step_tol || hi - lo < opt.step_tol) return {x, it, true};
  }
  return {x, opt.max_iterations, false};
}

}  // namespace rootflow
