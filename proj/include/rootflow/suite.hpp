#pragma once

// Experiment runner behind the `rootflow` command line tool. Each subcommand
// writes CSV series plus one JSON manifest into the output directory and
// reports its checks; the exit status follows
// 0 pass, 1 check failure, 2 configuration error, 3 engine abort.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "rootflow/config.hpp"
#include "rootflow/experiment.hpp"
#include "rootflow/fit.hpp"
#include "rootflow/kernel.hpp"

namespace rootflow {

inline constexpr const char* engine_version = "rootflow 0.1.0";

enum class Subcommand { pde_run, roots_run, coupled_run, scaling_sweep, kernel_check, predict_check };

inline std::optional<Subcommand> parse_subcommand(const std::string& s) {
  if (s == "pde-run") return Subcommand::pde_run;
  if (s == "roots-run") return Subcommand::roots_run;
  if (s == "coupled-run") return Subcommand::coupled_run;
  if (s == "scaling-sweep") return Subcommand::scaling_sweep;
  if (s == "kernel-check") return Subcommand::kernel_check;
  if (s == "predict-check") return Subcommand::predict_check;
  return std::nullopt;
}

inline const char* to_string(Subcommand s) {
  switch (s) {
    case Subcommand::pde_run: return "pde-run";
    case Subcommand::roots_run: return "roots-run";
    case Subcommand::coupled_run: return "coupled-run";
    case Subcommand::scaling_sweep: return "scaling-sweep";
    case Subcommand::kernel_check: return "kernel-check";
    case Subcommand::predict_check: return "predict-check";
  }
  return "?";
}

namespace exit_code {
inline constexpr int pass = 0;
inline constexpr int check_failure = 1;
inline constexpr int config_error = 2;
inline constexpr int engine_abort = 3;
}  // namespace exit_code

inline const std::vector<std::string> coupled_csv_columns{
    "t", "E_inf", "V", "mean_u", "min_u", "sum_E_u", "gap_dev_max", "pred_resid_max",
    "du1_inf", "du2_inf", "du3_inf", "Hu_inf"};

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct PhaseTiming {
  std::string name;
  double seconds = 0.0;
};

struct RunManifest {
  json config;
  std::string version = engine_version;
  std::uint64_t seed = 0;
  std::vector<PhaseTiming> phases;
  std::vector<std::string> outputs;
  std::vector<CheckResult> checks;
  json summary = json::object();
  std::string error;
  int exit_status = exit_code::pass;

  json to_json() const {
    json checks_json = json::array();
    for (const auto& c : checks) {
      checks_json.push_back({{"name", c.name}, {"passed", c.passed}, {"value", c.value},
                             {"threshold", c.threshold}, {"detail", c.detail}});
    }
    json phases_json = json::array();
    for (const auto& p : phases) phases_json.push_back({{"name", p.name}, {"seconds", p.seconds}});
    return {{"engine_version", version}, {"config", config},   {"seed", seed},
            {"phases", phases_json},     {"outputs", outputs}, {"checks", checks_json},
            {"summary", summary},        {"error", error},     {"exit_status", exit_status}};
  }
};

struct SuiteOptions {
  std::optional<std::string> out_dir;
  std::optional<std::size_t> workers;
  std::optional<std::uint64_t> seed;
};

/// Writes rows with every value printed to 17 significant digits.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns)
      : out_(path), columns_(columns.size()) {
    if (!out_) throw Error(ErrorKind::config, "cannot write '" + path.string() + "'");
    for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
    out_ << '\n';
  }

  void row(const std::vector<double>& values) {
    if (values.size() != columns_) throw Error(ErrorKind::domain, "CSV row width mismatch");
    char buf[40];
    for (std::size_t i = 0; i < values.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", values[i]);
      out_ << (i ? "," : "") << buf;
    }
    out_ << '\n';
  }

 private:
  std::ofstream out_;
  std::size_t columns_;
};

namespace detail {

class PhaseClock {
 public:
  PhaseClock(RunManifest& m, std::string name)
      : manifest_(m), name_(std::move(name)), start_(std::chrono::steady_clock::now()) {}
  ~PhaseClock() {
    const auto dt = std::chrono::steady_clock::now() - start_;
    manifest_.phases.push_back({name_, std::chrono::duration<double>(dt).count()});
  }

 private:
  RunManifest& manifest_;
  std::string name_;
  std::chrono::steady_clock::time_point start_;
};

inline void add_check(RunManifest& m, std::string name, bool passed, double value, double threshold,
                      std::string detail = {}) {
  m.checks.push_back({std::move(name), passed, value, threshold, std::move(detail)});
}

inline std::vector<double> coupled_row(const CoupledRecord& r) {
  return {r.pde.t,         r.error_sup,         r.pde.amplitude,        r.pde.mean,
          r.pde.min,       r.mean_compat,       r.gap_deviation,        r.prediction_residual,
          r.pde.derivative_sup[0], r.pde.derivative_sup[1], r.pde.derivative_sup[2],
          r.pde.hilbert_sup};
}

inline void write_coupled_csv(const std::filesystem::path& path, const CoupledSeries& s) {
  CsvWriter csv(path, coupled_csv_columns);
  for (const auto& r : s.records) csv.row(coupled_row(r));
}

// Index of the record at time t (to 1e-12), if present.
inline std::optional<std::size_t> record_at(const CoupledSeries& s, double t) {
  for (std::size_t i = 0; i < s.records.size(); ++i) {
    if (std::abs(s.records[i].pde.t - t) < 1e-12) return i;
  }
  return std::nullopt;
}

inline void check_mean_and_max_principle(RunManifest& m, const std::vector<ObservableRecord>& obs,
                                         const Tolerances& tol) {
  double drift = 0.0, max_rise = 0.0, min_drop = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    drift = std::max(drift, std::abs(obs[i].mean - obs[0].mean));
    if (i > 0) {
      max_rise = std::max(max_rise, obs[i].max - obs[i - 1].max);
      min_drop = std::max(min_drop, obs[i - 1].min - obs[i].min);
    }
  }
  add_check(m, "mean_conservation", drift <= tol.mean_drift, drift, tol.mean_drift);
  add_check(m, "max_nonincreasing", max_rise <= tol.max_principle_slack, max_rise, tol.max_principle_slack);
  add_check(m, "min_nondecreasing", min_drop <= tol.max_principle_slack, min_drop, tol.max_principle_slack);
}

inline std::vector<double> checkpoint_times(const ExperimentConfig& cfg) {
  std::vector<double> ts;
  const double two_n = 2.0 * static_cast<double>(cfg.n);
  for (std::size_t k = 0; k <= cfg.total_steps(); k += cfg.checkpoint_stride) {
    ts.push_back(static_cast<double>(k) / two_n);
  }
  return ts;
}

inline void run_pde(const ExperimentConfig& cfg, const std::filesystem::path& out, RunManifest& m) {
  std::vector<ObservableRecord> obs;
  {
    PhaseClock clock(m, "pde");
    const PdeState s0{cfg.density.sample(cfg.resolved_grid_size()), 0.0};
    PdeIntegrator integ(s0);
    for (double t : checkpoint_times(cfg)) obs.push_back(observables(integ.advance_to(t)));
  }
  const auto path = out / "pde_run.csv";
  CsvWriter csv(path, {"t", "V", "mean_u", "min_u", "max_u", "du1_inf", "du2_inf", "du3_inf", "Hu_inf"});
  for (const auto& o : obs) {
    csv.row({o.t, o.amplitude, o.mean, o.min, o.max, o.derivative_sup[0], o.derivative_sup[1],
             o.derivative_sup[2], o.hilbert_sup});
  }
  m.outputs.push_back(path.string());
  check_mean_and_max_principle(m, obs, cfg.tolerances);
  if (obs.front().amplitude <= cfg.tolerances.constant_amplitude) {
    double vmax = 0.0;
    for (const auto& o : obs) vmax = std::max(vmax, o.amplitude);
    add_check(m, "steady_state", vmax <= cfg.tolerances.constant_amplitude, vmax,
              cfg.tolerances.constant_amplitude);
  }
}

inline void run_roots(const ExperimentConfig& cfg, const std::filesystem::path& out, RunManifest& m) {
  const auto path = out / "roots_run.csv";
  CsvWriter csv(path, {"t", "gap_dev_max", "min_gap", "max_gap", "log_abs_leading"});
  bool interlaced = true;
  std::size_t first_bad = 0;
  {
    PhaseClock clock(m, "roots");
    const GridFunction u0 = cfg.density.sample(cfg.resolved_grid_size());
    RootConfiguration roots = initial_roots(cfg, u0);
    const double lattice = pi / static_cast<double>(cfg.n);
    for (std::size_t k = 0; k <= cfg.total_steps(); ++k) {
      if (k % cfg.checkpoint_stride == 0) {
        double dev = 0.0, gmax = 0.0;
        for (std::size_t j = 0; j < roots.size(); ++j) {
          dev = std::max(dev, std::abs(roots.gap(j) - lattice));
          gmax = std::max(gmax, roots.gap(j));
        }
        csv.row({roots.time(), dev, roots.min_gap(), gmax, roots.leading_factor().log_abs});
      }
      if (k == cfg.total_steps()) break;
      RootConfiguration next = differentiate_roots(roots);
      if (interlaced && !interlaces(roots, next)) {
        interlaced = false;
        first_bad = k;
      }
      roots = std::move(next);
    }
  }
  m.outputs.push_back(path.string());
  add_check(m, "interlacing", interlaced, interlaced ? 1.0 : 0.0, 1.0,
            interlaced ? "" : "first failure at step " + std::to_string(first_bad));
}

inline void require_complete(const CoupledSeries& s) {
  if (s.aborted) throw Error(ErrorKind::non_convergence, "coupled run aborted: " + s.abort_message);
}

inline void run_coupled_cmd(const ExperimentConfig& cfg, const std::filesystem::path& out,
                            RunManifest& m) {
  CoupledSeries s;
  {
    PhaseClock clock(m, "coupled");
    s = run_coupled(cfg);
  }
  const auto path = out / "coupled_run.csv";
  write_coupled_csv(path, s);
  m.outputs.push_back(path.string());
  require_complete(s);
  bool finite = true;
  double emax = 0.0;
  std::vector<ObservableRecord> obs;
  for (const auto& r : s.records) {
    finite = finite && std::isfinite(r.error_sup);
    emax = std::max(emax, r.error_sup);
    obs.push_back(r.pde);
  }
  add_check(m, "error_finite", finite, emax, std::numeric_limits<double>::infinity());
  check_mean_and_max_principle(m, obs, cfg.tolerances);
}

// Runs one coupled experiment per n on a bounded pool; results keep input order.
inline std::vector<CoupledSeries> run_sweep(const std::vector<ExperimentConfig>& cfgs, std::size_t workers) {
  std::vector<CoupledSeries> results(cfgs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < cfgs.size(); i = next++) results[i] = run_coupled(cfgs[i]);
  };
  const std::size_t count = std::clamp<std::size_t>(workers, 1, cfgs.size());
  std::vector<std::jthread> pool;
  for (std::size_t w = 1; w < count; ++w) pool.emplace_back(work);
  work();
  return results;
}

inline void run_scaling(const ExperimentConfig& cfg, const std::filesystem::path& out, RunManifest& m) {
  const auto& sw = cfg.sweep;
  std::vector<ExperimentConfig> members;
  for (std::size_t n : sw.n_values) {
    ExperimentConfig c = cfg;
    c.n = n;
    c.grid_size = 0;
    c.t_final = std::max(sw.t_error, sw.t_mean_compat);
    c.checkpoint_stride = 1;
    members.push_back(c);
  }
  std::vector<CoupledSeries> runs;
  {
    PhaseClock clock(m, "sweep");
    runs = run_sweep(members, cfg.workers);
  }
  std::vector<double> ns, errs, preds, mc_ns, mcs;
  for (std::size_t i = 0; i < members.size(); ++i) {
    const auto path = out / ("coupled_n" + std::to_string(members[i].n) + ".csv");
    write_coupled_csv(path, runs[i]);
    m.outputs.push_back(path.string());
  }
  for (std::size_t i = 0; i < members.size(); ++i) {
    require_complete(runs[i]);
    const double n = static_cast<double>(members[i].n);
    const auto ie = record_at(runs[i], sw.t_error);
    const auto im = record_at(runs[i], sw.t_mean_compat);
    if (!ie || !im) throw Error(ErrorKind::config, "sweep times must be multiples of 1/(2n)");
    ns.push_back(n);
    errs.push_back(runs[i].records[*ie].error_sup);
    preds.push_back(runs[i].records.front().prediction_residual);
    if (members[i].n <= sw.mean_compat_n_max) {
      mc_ns.push_back(n);
      mcs.push_back(std::abs(runs[i].records[*im].mean_compat));
    }
  }
  const auto& tol = cfg.tolerances;
  const FitResult fe = fit_loglinear(ns, errs, FitMode::power);
  const FitResult fp = fit_loglinear(ns, preds, FitMode::power);
  const FitResult fm = fit_loglinear(mc_ns, mcs, FitMode::power);
  const double c_cal = errs.front() * std::pow(ns.front(), 1.5);
  double worst = 0.0;
  for (std::size_t i = 1; i < ns.size(); ++i) {
    worst = std::max(worst, errs[i] / (3.0 * c_cal * std::pow(ns[i], -1.5)));
  }
  add_check(m, "error_slope", fe.slope <= tol.error_slope_max, fe.slope, tol.error_slope_max);
  add_check(m, "error_n_to_minus_3_2_envelope", worst <= 1.0, worst, 1.0,
            "max over n of |E|_inf / (3 C n^-1.5), C calibrated at the smallest n");
  add_check(m, "prediction_slope", fp.slope <= tol.prediction_slope_max, fp.slope, tol.prediction_slope_max);
  add_check(m, "mean_compat_slope", fm.slope <= tol.mean_compat_slope_max, fm.slope,
            tol.mean_compat_slope_max);

  json summary = {
      {"n_values", ns},
      {"E_inf", {{"t", sw.t_error}, {"values", errs}, {"slope", fe.slope}, {"r_squared", fe.r_squared},
                 {"calibrated_C", c_cal}}},
      {"prediction_residual", {{"t", 0.0}, {"values", preds}, {"slope", fp.slope}, {"r_squared", fp.r_squared}}},
      {"mean_compatibility", {{"t", sw.t_mean_compat}, {"n_values", mc_ns}, {"values", mcs},
                              {"slope", fm.slope}, {"r_squared", fm.r_squared}}},
  };
  const auto path = out / "scaling_summary.json";
  std::ofstream(path) << summary.dump(2) << '\n';
  m.outputs.push_back(path.string());
  m.summary = summary;
}

inline void run_kernel(const ExperimentConfig& cfg, const std::filesystem::path& out, RunManifest& m) {
  ExperimentConfig c = cfg;
  c.checkpoint_stride = 1;
  c.t_final = *std::max_element(cfg.kernel.times.begin(), cfg.kernel.times.end());
  const auto path = out / "kernel_rows.csv";
  CsvWriter csv(path, {"t", "m", "row_sum", "a", "F_a", "kappa_min", "kappa_max"});
  EnvelopeBounds env;
  double min_kappa = std::numeric_limits<double>::infinity();
  double max_sum = 0.0, worst_excess = -std::numeric_limits<double>::infinity();
  double late_max_sum = 0.0;
  bool any_late = false;
  CoupledSeries s;
  {
    PhaseClock clock(m, "kernel");
    s = run_coupled(c, [&](const CheckpointView& v) {
      const double t = v.pde.t;
      const bool wanted = std::any_of(cfg.kernel.times.begin(), cfg.kernel.times.end(),
                                      [&](double tk) { return std::abs(tk - t) < 1e-12; });
      if (!wanted) return;
      for (std::size_t mi = 0; mi < v.roots.size(); ++mi) {
        const KernelRow row = kappa_row(v.roots, v.next, v.field, mi);
        double kmin = std::numeric_limits<double>::infinity(), kmax = 0.0;
        for (std::size_t j = 0; j < row.kappa.size(); ++j) {
          if (j == mi) continue;
          kmin = std::min(kmin, row.kappa[j]);
          kmax = std::max(kmax, row.kappa[j]);
        }
        accumulate_envelope(env, row);
        const double fa = f_bound(row.a);
        min_kappa = std::min(min_kappa, kmin);
        max_sum = std::max(max_sum, row.row_sum);
        worst_excess = std::max(worst_excess, row.row_sum - fa);
        if (t >= 1.0) {
          any_late = true;
          late_max_sum = std::max(late_max_sum, row.row_sum);
        }
        csv.row({t, static_cast<double>(mi), row.row_sum, row.a, fa, kmin, kmax});
      }
    });
  }
  m.outputs.push_back(path.string());
  require_complete(s);
  const auto& tol = cfg.tolerances;
  add_check(m, "kappa_positive", min_kappa > 0.0, min_kappa, 0.0);
  add_check(m, "row_sum_below_one", max_sum < 1.0, max_sum, 1.0);
  add_check(m, "row_sum_vs_F_bound", worst_excess <= tol.f_bound_slack, worst_excess, tol.f_bound_slack,
            "max over rows of S - F(a)");
  add_check(m, "envelope_ratio", env.ratio() <= tol.envelope_ratio_max, env.ratio(), tol.envelope_ratio_max);
  if (any_late) {
    add_check(m, "late_row_sum", late_max_sum <= tol.late_row_sum_max, late_max_sum, tol.late_row_sum_max);
  }
}

inline void run_predict(const ExperimentConfig& cfg, const std::filesystem::path& out, RunManifest& m) {
  const auto path = out / "predict.csv";
  CsvWriter csv(path, {"t", "m", "x_m", "y_m", "pred_lower", "pred_upper", "resid", "split_sum_err"});
  double worst_sum = 0.0, worst_resid = 0.0;
  GapBoundRatios bounds{1e300, 1e300};
  CoupledSeries s;
  {
    PhaseClock clock(m, "predict");
    s = run_coupled(cfg, [&](const CheckpointView& v) {
      const double two_n = static_cast<double>(v.roots.size());
      for (std::size_t mi = 0; mi < v.roots.size(); ++mi) {
        const GapSplit g = predict_gap_split(v.roots, v.field, mi);
        const double y = root_in_gap(v.roots, v.next, mi);
        const double density_gap = 1.0 / (two_n * v.field.u(v.roots.midpoint(mi)));
        const double sum_err = std::abs(g.lower + g.upper - density_gap);
        const double resid = std::abs((y - v.roots[mi]) - g.lower);
        worst_sum = std::max(worst_sum, sum_err);
        worst_resid = std::max(worst_resid, resid);
        csv.row({v.pde.t, static_cast<double>(mi), v.roots[mi], wrap_angle(y), g.lower, g.upper, resid, sum_err});
      }
      const GapBoundRatios r = gap_bound_ratios(v.roots, v.next, v.field);
      bounds.far = std::min(bounds.far, r.far);
      bounds.near = std::min(bounds.near, r.near);
    });
  }
  m.outputs.push_back(path.string());
  require_complete(s);
  add_check(m, "split_sums_to_density_gap", worst_sum <= cfg.tolerances.split_sum_tol, worst_sum,
            cfg.tolerances.split_sum_tol);
  add_check(m, "far_gap_lower_bound", bounds.far >= 1.0, bounds.far, 1.0,
            "min of |y_m - x_j| / (|m-j| / (8 |u|_inf n))");
  add_check(m, "near_gap_lower_bound", bounds.near >= 1.0, bounds.near, 1.0,
            "min sub-gap over half the arccot constant");
  m.summary = {{"max_prediction_residual", worst_resid}};
}

}  // namespace detail

/// Executes one subcommand; never throws for engine or check failures,
/// which are reported through the manifest's exit status.
inline RunManifest run_suite(Subcommand cmd, ExperimentConfig cfg, const SuiteOptions& opt = {}) {
  if (opt.out_dir) cfg.output_dir = *opt.out_dir;
  if (opt.workers) cfg.workers = *opt.workers;
  if (opt.seed) cfg.perturbation.seed = *opt.seed;

  RunManifest m;
  m.config = to_json(cfg);
  m.seed = cfg.perturbation.seed;
  const std::filesystem::path out(cfg.output_dir);
  const auto manifest_path = out / (std::string(to_string(cmd)) + ".manifest.json");
  try {
    std::filesystem::create_directories(out);
    m.outputs.push_back(manifest_path.string());
    switch (cmd) {
      case Subcommand::pde_run: detail::run_pde(cfg, out, m); break;
      case Subcommand::roots_run: detail::run_roots(cfg, out, m); break;
      case Subcommand::coupled_run: detail::run_coupled_cmd(cfg, out, m); break;
      case Subcommand::scaling_sweep: detail::run_scaling(cfg, out, m); break;
      case Subcommand::kernel_check: detail::run_kernel(cfg, out, m); break;
      case Subcommand::predict_check: detail::run_predict(cfg, out, m); break;
    }
    const bool ok = std::all_of(m.checks.begin(), m.checks.end(), [](const auto& c) { return c.passed; });
    m.exit_status = ok ? exit_code::pass : exit_code::check_failure;
  } catch (const Error& e) {
    m.error = e.what();
    m.exit_status = e.kind() == ErrorKind::config ? exit_code::config_error : exit_code::engine_abort;
  } catch (const std::filesystem::filesystem_error& e) {
    m.error = e.what();
    m.exit_status = exit_code::config_error;
  }
  std::ofstream(manifest_path) << m.to_json().dump(2) << '\n';
  return m;
}

}  // namespace rootflow
