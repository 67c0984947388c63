#pragma once

// JSON experiment configuration: parsing with validation, and the echo
// written back into run manifests.

#include <cstddef>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "json.hpp"
#include "rootflow/error.hpp"
#include "rootflow/experiment.hpp"

namespace rootflow {

using nlohmann::json;

namespace detail {

inline Error config_error(const std::string& msg) { return Error(ErrorKind::config, msg); }

inline void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                                const std::string& where) {
  if (!obj.is_object()) throw config_error("'" + where + "' must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.contains(key)) {
      throw config_error("unknown key '" + (where.empty() ? key : where + "." + key) + "'");
    }
  }
}

template <class T>
T read(const json& obj, const std::string& key, const std::string& where, T fallback) {
  if (!obj.contains(key)) return fallback;
  const std::string path = where.empty() ? key : where + "." + key;
  const json& v = obj.at(key);
  if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) throw config_error("key '" + path + "' must be a string");
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) throw config_error("key '" + path + "' must be an integer");
    if constexpr (std::is_unsigned_v<T>) {
      if (v.get<long long>() < 0) throw config_error("key '" + path + "' must be non-negative");
    }
  } else {
    if (!v.is_number()) throw config_error("key '" + path + "' must be a number");
  }
  return v.get<T>();
}

inline DensitySpec parse_density(const json& d) {
  DensitySpec spec;
  if (!d.is_object()) throw config_error("'density' must be an object");
  const std::string type = read<std::string>(d, "type", "density", "");
  if (type == "cosine") {
    reject_unknown_keys(d, {"type", "amplitude", "phase"}, "density");
    spec.type = DensitySpec::Type::cosine;
    spec.amplitude = read<double>(d, "amplitude", "density", 0.5);
    spec.phase = read<double>(d, "phase", "density", 0.0);
  } else if (type == "fourier") {
    reject_unknown_keys(d, {"type", "constant", "modes"}, "density");
    spec.type = DensitySpec::Type::fourier;
    spec.constant = read<double>(d, "constant", "density", 1.0 / two_pi);
    if (d.contains("modes")) {
      const json& modes = d.at("modes");
      if (!modes.is_array()) throw config_error("key 'density.modes' must be an array");
      for (std::size_t i = 0; i < modes.size(); ++i) {
        const std::string where = "density.modes[" + std::to_string(i) + "]";
        reject_unknown_keys(modes[i], {"k", "cos", "sin"}, where);
        FourierMode m;
        m.k = read<int>(modes[i], "k", where, 0);
        if (m.k < 1) throw config_error("key '" + where + ".k' must be >= 1");
        m.cos = read<double>(modes[i], "cos", where, 0.0);
        m.sin = read<double>(modes[i], "sin", where, 0.0);
        spec.modes.push_back(m);
      }
    }
  } else {
    throw config_error("key 'density.type' must be \"cosine\" or \"fourier\"");
  }
  return spec;
}

inline void validate_density(const ExperimentConfig& cfg) {
  const std::size_t grid = cfg.resolved_grid_size();
  const GridFunction u = cfg.density.sample(grid);
  const std::size_t q = u.argmin();
  if (!(u[q] > 0.0)) {
    std::ostringstream msg;
    msg << "density is non-positive at grid point " << q << " (x = " << GridFunction::node(q, grid)
        << ", u = " << u[q] << ")";
    throw config_error(msg.str());
  }
  const double mass = two_pi * u.mean();
  if (std::abs(mass - 1.0) > 1e-10) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "density total mass is " << mass << ", expected 1";
    throw config_error(msg.str());
  }
}

}  // namespace detail

/// Builds a validated configuration from parsed JSON; defaults fill missing keys.
inline ExperimentConfig parse_config_json(const json& j) {
  using detail::config_error;
  using detail::read;
  detail::reject_unknown_keys(j, {"n", "grid_size", "density", "t_final", "checkpoint_stride",
                                  "perturbation", "output", "workers", "tolerances", "sweep",
                                  "kernel"},
                              "");
  ExperimentConfig cfg;
  if (!j.contains("n")) throw config_error("missing required key 'n'");
  cfg.n = read<std::size_t>(j, "n", "", 0);
  if (cfg.n == 0) throw config_error("key 'n' must be positive");
  cfg.grid_size = read<std::size_t>(j, "grid_size", "", 0);
  if (cfg.grid_size % 2 != 0) throw config_error("key 'grid_size' must be even");
  if (!j.contains("density")) throw config_error("missing required key 'density'");
  cfg.density = detail::parse_density(j.at("density"));
  cfg.t_final = read<double>(j, "t_final", "", 1.0);
  if (!(cfg.t_final >= 0.0)) throw config_error("key 't_final' must be non-negative");
  cfg.checkpoint_stride = read<std::size_t>(j, "checkpoint_stride", "", 1);
  if (cfg.checkpoint_stride == 0) throw config_error("key 'checkpoint_stride' must be positive");
  cfg.output_dir = read<std::string>(j, "output", "", ".");
  cfg.workers = read<std::size_t>(j, "workers", "", 1);
  if (cfg.workers == 0) throw config_error("key 'workers' must be positive");

  if (j.contains("perturbation")) {
    const json& p = j.at("perturbation");
    detail::reject_unknown_keys(p, {"Z0", "eps", "seed"}, "perturbation");
    cfg.perturbation.z0 = read<double>(p, "Z0", "perturbation", 0.0);
    cfg.perturbation.eps = read<double>(p, "eps", "perturbation", 0.5);
    cfg.perturbation.seed = read<std::uint64_t>(p, "seed", "perturbation", 1);
    if (cfg.perturbation.z0 < 0.0) throw config_error("key 'perturbation.Z0' must be >= 0");
    if (!(cfg.perturbation.eps > 0.0)) throw config_error("key 'perturbation.eps' must be > 0");
  }

  if (j.contains("tolerances")) {
    const json& t = j.at("tolerances");
    auto& tol = cfg.tolerances;
    detail::reject_unknown_keys(
        t, {"mean_drift", "max_principle_slack", "constant_amplitude", "error_slope_max",
            "prediction_slope_max", "mean_compat_slope_max", "envelope_ratio_max",
            "f_bound_slack", "late_row_sum_max", "split_sum_tol"},
        "tolerances");
    tol.mean_drift = read<double>(t, "mean_drift", "tolerances", tol.mean_drift);
    tol.max_principle_slack = read<double>(t, "max_principle_slack", "tolerances", tol.max_principle_slack);
    tol.constant_amplitude = read<double>(t, "constant_amplitude", "tolerances", tol.constant_amplitude);
    tol.error_slope_max = read<double>(t, "error_slope_max", "tolerances", tol.error_slope_max);
    tol.prediction_slope_max = read<double>(t, "prediction_slope_max", "tolerances", tol.prediction_slope_max);
    tol.mean_compat_slope_max = read<double>(t, "mean_compat_slope_max", "tolerances", tol.mean_compat_slope_max);
    tol.envelope_ratio_max = read<double>(t, "envelope_ratio_max", "tolerances", tol.envelope_ratio_max);
    tol.f_bound_slack = read<double>(t, "f_bound_slack", "tolerances", tol.f_bound_slack);
    tol.late_row_sum_max = read<double>(t, "late_row_sum_max", "tolerances", tol.late_row_sum_max);
    tol.split_sum_tol = read<double>(t, "split_sum_tol", "tolerances", tol.split_sum_tol);
  }

  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    detail::reject_unknown_keys(s, {"n_values", "t_error", "t_mean_compat", "mean_compat_n_max"}, "sweep");
    if (s.contains("n_values")) {
      const json& ns = s.at("n_values");
      if (!ns.is_array() || ns.size() < 3) throw config_error("key 'sweep.n_values' must be an array of >= 3 integers");
      cfg.sweep.n_values.clear();
      for (const auto& v : ns) {
        if (!v.is_number_integer() || v.get<long long>() <= 0) {
          throw config_error("key 'sweep.n_values' must contain positive integers");
        }
        cfg.sweep.n_values.push_back(v.get<std::size_t>());
      }
    }
    cfg.sweep.t_error = read<double>(s, "t_error", "sweep", cfg.sweep.t_error);
    cfg.sweep.t_mean_compat = read<double>(s, "t_mean_compat", "sweep", cfg.sweep.t_mean_compat);
    cfg.sweep.mean_compat_n_max = read<std::size_t>(s, "mean_compat_n_max", "sweep", cfg.sweep.mean_compat_n_max);
  }

  if (j.contains("kernel")) {
    const json& k = j.at("kernel");
    detail::reject_unknown_keys(k, {"times"}, "kernel");
    if (k.contains("times")) {
      const json& ts = k.at("times");
      if (!ts.is_array() || ts.empty()) throw config_error("key 'kernel.times' must be a non-empty array");
      cfg.kernel.times.clear();
      for (const auto& v : ts) {
        if (!v.is_number() || v.get<double>() < 0.0) throw config_error("key 'kernel.times' must contain non-negative numbers");
        cfg.kernel.times.push_back(v.get<double>());
      }
    }
  }

  detail::validate_density(cfg);
  return cfg;
}

inline ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::config, "cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::config, std::string("malformed JSON: ") + e.what());
  }
  return parse_config_json(j);
}

/// Fully resolved configuration, defaults included.
inline json to_json(const ExperimentConfig& cfg) {
  json density;
  if (cfg.density.type == DensitySpec::Type::cosine) {
    density = {{"type", "cosine"}, {"amplitude", cfg.density.amplitude}, {"phase", cfg.density.phase}};
  } else {
    json modes = json::array();
    for (const auto& m : cfg.density.modes) modes.push_back({{"k", m.k}, {"cos", m.cos}, {"sin", m.sin}});
    density = {{"type", "fourier"}, {"constant", cfg.density.constant}, {"modes", modes}};
  }
  const auto& t = cfg.tolerances;
  return {
      {"n", cfg.n},
      {"grid_size", cfg.resolved_grid_size()},
      {"density", density},
      {"t_final", cfg.t_final},
      {"checkpoint_stride", cfg.checkpoint_stride},
      {"perturbation", {{"Z0", cfg.perturbation.z0}, {"eps", cfg.perturbation.eps}, {"seed", cfg.perturbation.seed}}},
      {"output", cfg.output_dir},
      {"workers", cfg.workers},
      {"tolerances",
       {{"mean_drift", t.mean_drift},
        {"max_principle_slack", t.max_principle_slack},
        {"constant_amplitude", t.constant_amplitude},
        {"error_slope_max", t.error_slope_max},
        {"prediction_slope_max", t.prediction_slope_max},
        {"mean_compat_slope_max", t.mean_compat_slope_max},
        {"envelope_ratio_max", t.envelope_ratio_max},
        {"f_bound_slack", t.f_bound_slack},
        {"late_row_sum_max", t.late_row_sum_max},
        {"split_sum_tol", t.split_sum_tol}}},
      {"sweep",
       {{"n_values", cfg.sweep.n_values},
        {"t_error", cfg.sweep.t_error},
        {"t_mean_compat", cfg.sweep.t_mean_compat},
        {"mean_compat_n_max", cfg.sweep.mean_compat_n_max}}},
      {"kernel", {{"times", cfg.kernel.times}}},
  };
}

}  // namespace rootflow
