#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <span>
#include <vector>

namespace rootflow::fft {

namespace detail {

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

// FFTW planning is not thread-safe, execution on fresh arrays is. Plans are
// created once per size under a lock and kept for the process lifetime.
inline const PlanPair& plans_for(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, PlanPair> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  const int size = static_cast<int>(n);
  double* real = fftw_alloc_real(n);
  fftw_complex* spec = fftw_alloc_complex(n / 2 + 1);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  PlanPair p;
  p.forward = fftw_plan_dft_r2c_1d(size, real, spec, flags);
  p.backward = fftw_plan_dft_c2r_1d(size, spec, real, flags);
  fftw_free(real);
  fftw_free(spec);
  return cache.emplace(n, p).first->second;
}

}  // namespace detail

using Spectrum = std::vector<std::complex<double>>;

/// Unnormalized forward real DFT: X_k = sum_q x_q exp(-2 pi i k q / N),
/// k = 0..N/2.
inline Spectrum forward(std::span<const double> samples) {
  const std::size_t n = samples.size();
  std::vector<double> in(samples.begin(), samples.end());
  Spectrum out(n / 2 + 1);
  fftw_execute_dft_r2c(detail::plans_for(n).forward, in.data(),
                       reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

/// Inverse of `forward`, including the 1/N normalization.
inline std::vector<double> inverse(const Spectrum& spectrum, std::size_t n) {
  Spectrum in = spectrum;  // c2r overwrites its input
  std::vector<double> out(n);
  fftw_execute_dft_c2r(detail::plans_for(n).backward,
                       reinterpret_cast<fftw_complex*>(in.data()), out.data());
  const double scale = 1.0 / static_cast<double>(n);
  for (double& v : out) v *= scale;
  return out;
}

}  // namespace rootflow::fft
