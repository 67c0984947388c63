#pragma once

#include <cmath>
#include <cstddef>
#include <span>

#include "rootflow/error.hpp"

namespace rootflow {

enum class FitMode {
  rate,   // log y against x: y ~ C exp(slope x)
  power,  // log y against log x: y ~ C x^slope
};

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Least-squares line through (x, log y) or (log x, log y).
inline FitResult fit_loglinear(std::span<const double> xs, std::span<const double> ys, FitMode mode) {
  if (xs.size() != ys.size()) throw Error(ErrorKind::domain, "fit: xs and ys differ in length");
  if (xs.size() < 3) throw Error(ErrorKind::domain, "fit: need at least 3 points");
  const std::size_t n = xs.size();
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(ys[i] > 0.0)) throw Error(ErrorKind::domain, "fit: y values must be positive");
    if (mode == FitMode::power && !(xs[i] > 0.0)) throw Error(ErrorKind::domain, "fit: power mode needs x > 0");
    sx += mode == FitMode::power ? std::log(xs[i]) : xs[i];
    sy += std::log(ys[i]);
  }
  const double mx = sx / static_cast<double>(n);
  const double my = sy / static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = (mode == FitMode::power ? std::log(xs[i]) : xs[i]) - mx;
    const double dy = std::log(ys[i]) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw Error(ErrorKind::domain, "fit: x values are all equal");
  FitResult r;
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  const double ss_res = syy - r.slope * sxy;
  r.r_squared = syy > 0.0 ? 1.0 - std::max(ss_res, 0.0) / syy : 1.0;
  return r;
}

}  // namespace rootflow
