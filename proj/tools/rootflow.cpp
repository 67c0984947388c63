// rootflow <subcommand> --config <path> [--out <dir>] [--workers <k>] [--seed <s>]

#include <cstdlib>
#include <stdexcept>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "rootflow/suite.hpp"

int main(int argc, char** argv) {
  using namespace rootflow;

  CLI::App app{"Root flow under differentiation versus its mean-field PDE"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::size_t workers = 0;
  std::uint64_t seed = 0;

  const char* names[] = {"pde-run", "roots-run", "coupled-run", "scaling-sweep", "kernel-check",
                         "predict-check"};
  const char* help[] = {
      "Integrate the PDE and record observables",
      "Differentiate the root configuration repeatedly",
      "Run roots and PDE side by side and record the coupling error",
      "Coupled runs over several n with fitted scaling exponents",
      "Evaluate the error-propagation kernel rows",
      "Compare derivative roots with the gap-split prediction",
  };
  for (int i = 0; i < 6; ++i) {
    CLI::App* sub = app.add_subcommand(names[i], help[i]);
    sub->add_option("--config", config_path, "JSON experiment configuration")->required();
    sub->add_option("--out", out_dir, "Output directory (overrides the config)");
    sub->add_option("--workers", workers, "Parallel experiments for sweeps")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "Perturbation seed (overrides the config)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : exit_code::config_error;
  }

  const CLI::App* chosen = app.get_subcommands().front();
  const auto cmd = parse_subcommand(chosen->get_name());

  SuiteOptions opt;
  if (chosen->count("--out")) opt.out_dir = out_dir;
  if (chosen->count("--seed")) opt.seed = seed;
  if (chosen->count("--workers")) {
    opt.workers = workers;
  } else if (const char* env = std::getenv("ROOTFLOW_WORKERS")) {
    try {
      opt.workers = static_cast<std::size_t>(std::stoul(env));
      if (*opt.workers == 0) throw std::invalid_argument("zero");
    } catch (const std::exception&) {
      std::cerr << "error: ROOTFLOW_WORKERS must be a positive integer\n";
      return exit_code::config_error;
    }
  }

  ExperimentConfig cfg;
  try {
    cfg = parse_config(config_path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code::config_error;
  }

  const RunManifest m = run_suite(*cmd, cfg, opt);
  for (const auto& c : m.checks) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << "  value=" << c.value
              << "  threshold=" << c.threshold << '\n';
  }
  if (!m.error.empty()) std::cerr << "error: " << m.error << '\n';
  for (const auto& p : m.outputs) std::cout << "wrote " << p << '\n';
  return m.exit_status;
}
