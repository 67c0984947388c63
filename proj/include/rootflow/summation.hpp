#pragma once

#include <cmath>
#include <ranges>

namespace rootflow {

/// Neumaier's variant of Kahan summation. Robust when a large term is
/// followed by terms of smaller magnitude and when partial sums cancel.
class CompensatedSum {
 public:
  constexpr CompensatedSum() = default;
  constexpr explicit CompensatedSum(double init) : sum_(init) {}

  constexpr CompensatedSum& operator+=(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
    return *this;
  }

  constexpr double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

template <std::ranges::input_range R>
double compensated_sum(R&& values) {
  CompensatedSum acc;
  for (double v : values) acc += v;
  return acc.value();
}

}  // namespace rootflow
