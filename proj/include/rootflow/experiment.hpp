#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rootflow/coupling.hpp"
#include "rootflow/error.hpp"
#include "rootflow/kernel.hpp"
#include "rootflow/pde.hpp"
#include "rootflow/spectral.hpp"
#include "rootflow/trigpoly.hpp"

namespace rootflow {

struct FourierMode {
  int k = 1;
  double cos = 0.0;
  double sin = 0.0;
};

/// Initial density: either (1 + A cos(x - phase)) / (2 pi) or
/// constant + sum_k (a_k cos kx + b_k sin kx).
struct DensitySpec {
  enum class Type { cosine, fourier };
  Type type = Type::cosine;
  double amplitude = 0.5;
  double phase = 0.0;
  double constant = 1.0 / (2.0 * std::numbers::pi);
  std::vector<FourierMode> modes;

  double operator()(double x) const {
    if (type == Type::cosine) return (1.0 + amplitude * std::cos(x - phase)) / two_pi;
    double v = constant;
    for (const auto& m : modes) v += m.cos * std::cos(m.k * x) + m.sin * std::sin(m.k * x);
    return v;
  }

  GridFunction sample(std::size_t grid_size) const {
    return GridFunction::from_function(grid_size, [this](double x) { return (*this)(x); });
  }
};

struct Perturbation {
  double z0 = 0.0;
  double eps = 0.5;
  std::uint64_t seed = 1;
};

/// Acceptance thresholds the CLI checks against.
struct Tolerances {
  double mean_drift = 1e-12;
  double max_principle_slack = 1e-10;
  double constant_amplitude = 1e-12;
  double error_slope_max = -1.25;
  double prediction_slope_max = -1.4;
  double mean_compat_slope_max = -1.8;
  double envelope_ratio_max = 50.0;
  double f_bound_slack = 0.15;
  double late_row_sum_max = 0.95;
  double split_sum_tol = 1e-14;
};

struct SweepSettings {
  std::vector<std::size_t> n_values{32, 64, 128, 256};
  double t_error = 0.5;        // time at which |E|_inf is compared across n
  double t_mean_compat = 0.25;  // time at which sum E_j u(xbar_j) is compared
  std::size_t mean_compat_n_max = 128;
};

struct KernelSettings {
  std::vector<double> times{0.0, 0.25, 0.5, 1.0};
};

struct ExperimentConfig {
  std::size_t n = 64;
  std::size_t grid_size = 0;  // 0: max(256, 8n)
  DensitySpec density;
  Perturbation perturbation;
  double t_final = 1.0;
  std::size_t checkpoint_stride = 1;
  std::string output_dir = ".";
  std::size_t workers = 1;
  Tolerances tolerances;
  SweepSettings sweep;
  KernelSettings kernel;

  std::size_t resolved_grid_size() const {
    return grid_size != 0 ? grid_size : std::max<std::size_t>(256, 8 * n);
  }
  /// Number of differentiation steps 2n * t_final.
  std::size_t total_steps() const {
    return static_cast<std::size_t>(std::llround(2.0 * static_cast<double>(n) * t_final));
  }
};

/// One row of a coupled run.
struct CoupledRecord {
  std::size_t step = 0;
  ObservableRecord pde;
  double error_sup = 0.0;           // |E^t|_inf
  double mean_compat = 0.0;         // sum_j E_j u(xbar_j)
  double gap_deviation = 0.0;       // max_j |gap_j - pi/n|
  double prediction_residual = 0.0; // max_m |(y_m - x_m) - prediction|
};

struct CoupledSeries {
  std::vector<CoupledRecord> records;
  bool aborted = false;
  std::string abort_message;
};

/// Everything an observer may inspect at a checkpoint.
struct CheckpointView {
  const RootConfiguration& roots;
  const RootConfiguration& next;
  const PdeState& pde;
  const CouplingField& field;
  const CoupledRecord& record;
};

using CheckpointObserver = std::function<void(const CheckpointView&)>;

inline RootConfiguration initial_roots(const ExperimentConfig& cfg, const GridFunction& u0) {
  RootConfiguration roots = quantile_init(u0, cfg.n);
  const auto& p = cfg.perturbation;
  if (p.z0 > 0.0) roots = perturb_roots(roots, p.z0, p.eps, p.seed);
  return roots;
}

inline CoupledRecord measure(const RootConfiguration& roots, const RootConfiguration& next,
                             const PdeState& pde, const CouplingField& field) {
  CoupledRecord rec;
  rec.step = roots.step_index();
  rec.pde = observables(pde);
  const ErrorVector e = error_vector(roots, field.u);
  rec.error_sup = e.sup_norm();
  rec.mean_compat = mean_compatibility(e, field.u);
  const double lattice = pi / static_cast<double>(roots.n());
  for (double g : e.gaps) rec.gap_deviation = std::max(rec.gap_deviation, std::abs(g - lattice));
  rec.prediction_residual = prediction_residual(roots, next, field);
  return rec;
}

/// Differentiates the roots 2n t_final times alongside the PDE and records
/// the coupling diagnostics every `checkpoint_stride` steps. Engine failures
/// end the run early with the partial series kept.
inline CoupledSeries run_coupled(const ExperimentConfig& cfg,
                                 const CheckpointObserver& observer = {}) {
  if (cfg.checkpoint_stride == 0) throw Error(ErrorKind::config, "checkpoint_stride must be positive");
  CoupledSeries series;
  try {
    const GridFunction u0 = cfg.density.sample(cfg.resolved_grid_size());
    RootConfiguration roots = initial_roots(cfg, u0);
    PdeIntegrator integ({u0, 0.0});
    const std::size_t steps = cfg.total_steps();
    const double two_n = 2.0 * static_cast<double>(cfg.n);
    for (std::size_t k = 0; k <= steps; ++k) {
      const PdeState& pde = integ.advance_to(static_cast<double>(k) / two_n);
      RootConfiguration next = differentiate_roots(roots);
      if (k % cfg.checkpoint_stride == 0) {
        const CouplingField field(pde.u);
        series.records.push_back(measure(roots, next, pde, field));
        if (observer) observer({roots, next, pde, field, series.records.back()});
      }
      roots = std::move(next);
    }
  } catch (const Error& e) {
    series.aborted = true;
    series.abort_message = e.what();
  }
  return series;
}

}  // namespace rootflow
