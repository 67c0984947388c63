#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "rootflow/config.hpp"
#include "rootflow/fit.hpp"
#include "rootflow/suite.hpp"

using namespace rootflow;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("rootflow_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_count(const fs::path& p) {
  const std::string s = slurp(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

std::string config_error_message(const json& j) {
  try {
    parse_config_json(j);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::config);
    return e.what();
  }
  ADD_FAILURE() << "expected a config error for " << j.dump();
  return {};
}

ExperimentConfig small_config(std::size_t n, double t_final) {
  ExperimentConfig cfg = parse_config_json({{"n", n}, {"density", {{"type", "cosine"}}}});
  cfg.t_final = t_final;
  return cfg;
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(ROOTFLOW_CLI) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, MinimalUsesDefaults) {
  const auto cfg = parse_config_json({{"n", 64}, {"density", {{"type", "cosine"}}}});
  EXPECT_EQ(cfg.resolved_grid_size(), 512u);
  EXPECT_EQ(cfg.density.amplitude, 0.5);
  EXPECT_EQ(cfg.total_steps(), 128u);
  EXPECT_EQ(cfg.perturbation.z0, 0.0);
  EXPECT_EQ(parse_config_json({{"n", 8}, {"density", {{"type", "cosine"}}}}).resolved_grid_size(), 256u);
}

TEST(Config, RejectsNonPositiveDensity) {
  const auto msg = config_error_message({{"n", 16}, {"density", {{"type", "cosine"}, {"amplitude", 1.2}}}});
  EXPECT_NE(msg.find("non-positive"), std::string::npos) << msg;
}

TEST(Config, RejectsWrongMassAndReportsIt) {
  const auto msg = config_error_message(
      {{"n", 16}, {"density", {{"type", "fourier"}, {"constant", 0.2}, {"modes", json::array()}}}});
  EXPECT_NE(msg.find("1.2566370614359"), std::string::npos) << msg;
}

TEST(Config, AcceptsFourierDensity) {
  const auto cfg = parse_config_json(
      {{"n", 16},
       {"density", {{"type", "fourier"}, {"modes", {{{"k", 2}, {"cos", 0.05}, {"sin", -0.02}}}}}}});
  EXPECT_NEAR(cfg.density(0.0), 1.0 / two_pi + 0.05, 1e-15);
}

TEST(Config, NamesUnknownKeys) {
  EXPECT_NE(config_error_message({{"n", 16}, {"density", {{"type", "cosine"}}}, {"bogus", 1}}).find("'bogus'"),
            std::string::npos);
  EXPECT_NE(config_error_message({{"n", 16}, {"density", {{"type", "cosine"}}}, {"sweep", {{"nn", 1}}}})
                .find("'sweep.nn'"),
            std::string::npos);
}

TEST(Config, TypeAndRangeErrors) {
  config_error_message({{"density", {{"type", "cosine"}}}});
  config_error_message({{"n", "64"}, {"density", {{"type", "cosine"}}}});
  config_error_message({{"n", 0}, {"density", {{"type", "cosine"}}}});
  config_error_message({{"n", 16}, {"grid_size", 255}, {"density", {{"type", "cosine"}}}});
  config_error_message({{"n", 16}, {"density", {{"type", "square"}}}});
  config_error_message({{"n", 16}, {"density", {{"type", "cosine"}}}, {"sweep", {{"n_values", {8, 16}}}}});
}

TEST(Config, MalformedFile) {
  const auto dir = scratch("malformed");
  std::ofstream(dir / "bad.json") << "{ \"n\": 4, ";
  EXPECT_THROW(parse_config((dir / "bad.json").string()), Error);
  EXPECT_THROW(parse_config((dir / "missing.json").string()), Error);
}

TEST(Config, RoundTripsThroughJson) {
  const auto cfg = parse_config_json({{"n", 32}, {"density", {{"type", "cosine"}, {"amplitude", 0.3}}}, {"t_final", 0.75}});
  const auto again = parse_config_json([&] {
    json j = to_json(cfg);
    j.erase("output");
    return j;
  }());
  EXPECT_EQ(to_json(again).dump(), [&] {
    json j = to_json(cfg);
    j["output"] = ".";
    return j.dump();
  }());
}

TEST(Fit, Examples) {
  const std::vector<double> t{0.0, 1.0, 2.0, 3.0};
  std::vector<double> y;
  for (double v : t) y.push_back(3.0 * std::exp(-1.5 * v));
  const auto r = fit_loglinear(t, y, FitMode::rate);
  EXPECT_NEAR(r.slope, -1.5, 1e-13);
  EXPECT_NEAR(std::exp(r.intercept), 3.0, 1e-12);
  EXPECT_NEAR(r.r_squared, 1.0, 1e-12);

  const std::vector<double> n{32, 64, 128, 256};
  std::vector<double> e;
  for (double v : n) e.push_back(std::pow(v, -1.5));
  EXPECT_NEAR(fit_loglinear(n, e, FitMode::power).slope, -1.5, 1e-13);

  EXPECT_THROW(fit_loglinear(std::vector<double>{1, 2}, std::vector<double>{1, 2}, FitMode::rate), Error);
  EXPECT_THROW(fit_loglinear(std::vector<double>{1, 2, 3}, std::vector<double>{1, 0, 2}, FitMode::rate), Error);
  EXPECT_THROW(fit_loglinear(std::vector<double>{0, 2, 3}, std::vector<double>{1, 1, 2}, FitMode::power), Error);
}

TEST(Subcommand, Names) {
  for (const char* s : {"pde-run", "roots-run", "coupled-run", "scaling-sweep", "kernel-check", "predict-check"}) {
    const auto c = parse_subcommand(s);
    ASSERT_TRUE(c.has_value()) << s;
    EXPECT_STREQ(to_string(*c), s);
  }
  EXPECT_FALSE(parse_subcommand("nope").has_value());
}

TEST(Suite, CoupledRunWritesCsvAndManifest) {
  const auto dir = scratch("coupled");
  auto cfg = small_config(16, 0.5);
  cfg.checkpoint_stride = 2;
  const auto m = run_suite(Subcommand::coupled_run, cfg, {dir.string(), std::nullopt, std::nullopt});
  EXPECT_EQ(m.exit_status, exit_code::pass) << m.error;
  const auto csv = dir / "coupled_run.csv";
  ASSERT_TRUE(fs::exists(csv));
  EXPECT_EQ(line_count(csv), 1u + 9u);  // header + steps 0, 2, ..., 16
  const std::string text = slurp(csv);
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "t,E_inf,V,mean_u,min_u,sum_E_u,gap_dev_max,pred_resid_max,du1_inf,du2_inf,du3_inf,Hu_inf");
  const json manifest = json::parse(slurp(dir / "coupled-run.manifest.json"));
  EXPECT_EQ(manifest["exit_status"], 0);
  EXPECT_EQ(manifest["engine_version"], engine_version);
  EXPECT_EQ(manifest["config"]["n"], 16);
}

TEST(Suite, CsvIsReproducible) {
  const auto a = scratch("repro_a"), b = scratch("repro_b");
  auto cfg = small_config(16, 0.25);
  cfg.perturbation = {0.5, 0.5, 3};
  run_suite(Subcommand::coupled_run, cfg, {a.string(), std::nullopt, std::nullopt});
  run_suite(Subcommand::coupled_run, cfg, {b.string(), std::nullopt, std::nullopt});
  EXPECT_EQ(slurp(a / "coupled_run.csv"), slurp(b / "coupled_run.csv"));
  const auto c = scratch("repro_c");
  run_suite(Subcommand::coupled_run, cfg, {c.string(), std::nullopt, std::uint64_t{4}});
  EXPECT_NE(slurp(a / "coupled_run.csv"), slurp(c / "coupled_run.csv"));
}

TEST(Suite, SweepIndependentOfWorkerCount) {
  const auto a = scratch("sweep_a"), b = scratch("sweep_b");
  auto cfg = small_config(16, 0.5);
  cfg.sweep.n_values = {8, 16, 32};
  cfg.sweep.mean_compat_n_max = 32;
  run_suite(Subcommand::scaling_sweep, cfg, {a.string(), std::size_t{1}, std::nullopt});
  run_suite(Subcommand::scaling_sweep, cfg, {b.string(), std::size_t{3}, std::nullopt});
  for (const char* f : {"coupled_n8.csv", "coupled_n16.csv", "coupled_n32.csv"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  EXPECT_TRUE(fs::exists(a / "scaling_summary.json"));
}

TEST(Suite, PdeRunAndOtherSubcommands) {
  const auto dir = scratch("others");
  auto cfg = small_config(16, 0.5);
  EXPECT_EQ(run_suite(Subcommand::pde_run, cfg, {dir.string(), std::nullopt, std::nullopt}).exit_status, 0);
  EXPECT_EQ(line_count(dir / "pde_run.csv"), 1u + 17u);
  EXPECT_EQ(run_suite(Subcommand::roots_run, cfg, {dir.string(), std::nullopt, std::nullopt}).exit_status, 0);
  EXPECT_EQ(run_suite(Subcommand::predict_check, cfg, {dir.string(), std::nullopt, std::nullopt}).exit_status, 0);
  cfg.kernel.times = {0.0, 0.25};
  EXPECT_EQ(run_suite(Subcommand::kernel_check, cfg, {dir.string(), std::nullopt, std::nullopt}).exit_status, 0);
  EXPECT_TRUE(fs::exists(dir / "kernel_rows.csv"));
  EXPECT_TRUE(fs::exists(dir / "predict.csv"));
  EXPECT_TRUE(fs::exists(dir / "roots_run.csv"));
}

TEST(Suite, FailedCheckGivesExitOne) {
  const auto dir = scratch("fail");
  auto cfg = small_config(16, 0.25);
  cfg.tolerances.mean_drift = -1.0;  // unsatisfiable on purpose
  EXPECT_EQ(run_suite(Subcommand::pde_run, cfg, {dir.string(), std::nullopt, std::nullopt}).exit_status,
            exit_code::check_failure);
}

TEST(Suite, EngineAbortGivesExitThree) {
  const auto dir = scratch("abort");
  auto cfg = small_config(8, 0.25);
  cfg.perturbation = {5.0, 0.01, 1};
  const auto m = run_suite(Subcommand::coupled_run, cfg, {dir.string(), std::nullopt, std::nullopt});
  EXPECT_EQ(m.exit_status, exit_code::engine_abort);
  EXPECT_FALSE(m.error.empty());
}

TEST(Binary, ExitCodes) {
  const auto dir = scratch("binary");
  std::ofstream(dir / "ok.json") << R"({"n": 8, "density": {"type": "cosine"}, "t_final": 0.25})";
  std::ofstream(dir / "bad.json") << R"({"n": 8, "density": {"type": "cosine", "amplitude": 2.0}})";
  const std::string out = " --out " + (dir / "out").string();
  EXPECT_EQ(run_cli("coupled-run --config " + (dir / "ok.json").string() + out), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "coupled_run.csv"));
  EXPECT_EQ(run_cli("coupled-run --config " + (dir / "bad.json").string() + out), 2);
  EXPECT_EQ(run_cli("coupled-run --config " + (dir / "absent.json").string() + out), 2);
  EXPECT_EQ(run_cli("no-such-command --config x"), 2);
  EXPECT_EQ(run_cli("pde-run --config " + (dir / "ok.json").string() + out + " --workers 0"), 2);
}
