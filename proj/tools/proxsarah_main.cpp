// proxsarah command-line driver: run experiments, verify identities, inspect presets.

#include "proxsarah/errors.hpp"
#include "proxsarah/experiment.hpp"
#include "proxsarah/log.hpp"
#include "proxsarah/presets.hpp"
#include "proxsarah/verify.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

int cmd_run(const std::string& config_path, const proxsarah::RunOverrides& overrides) {
  using namespace proxsarah;
  ExperimentConfig cfg = load_experiment_config(config_path);
  apply_overrides(cfg, overrides);
  const ExperimentOutcome outcome = run_experiment(cfg);
  if (log::level() == log::Level::kQuiet) return kOk;
  std::printf("F* = %.17g (%s)\n", outcome.f_star, outcome.absolute_residual ? "absolute residuals" : "relative");
  for (const SolverOutcome& so : outcome.solvers) {
    const auto& rows = so.result.trace.rows;
    std::printf("%-18s sfo %-10lld prox %-8lld final ||G||^2 %.3e  -> %s\n", so.label.c_str(),
                static_cast<long long>(so.result.counters.sfo), static_cast<long long>(so.result.counters.prox_calls),
                rows.empty() ? 0.0 : rows.back().grad_map_norm_sq, so.csv.string().c_str());
  }
  for (const auto& svg : outcome.svg_files) std::printf("plot %s\n", svg.string().c_str());
  std::printf("manifest %s\n", outcome.manifest.string().c_str());
  return kOk;
}

int cmd_verify(double omega_scale) {
  proxsarah::VerifyOptions options;
  options.omega_scale = omega_scale;
  const auto results = proxsarah::run_verification(options);
  std::cout << proxsarah::format_report(results);
  std::size_t failed = 0;
  for (const auto& r : results) failed += r.pass ? 0 : 1;
  std::cout << (failed == 0 ? "all " + std::to_string(results.size()) + " checks passed\n"
                            : std::to_string(failed) + " of " + std::to_string(results.size()) + " checks failed\n");
  return failed == 0 ? kOk : kFailure;
}

int cmd_presets_list() {
  for (const auto& entry : proxsarah::preset_catalog()) {
    std::printf("%-18s %s%s\n", entry.name.c_str(), entry.baseline ? "[baseline] " : "", entry.summary.c_str());
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ProxSARAH and baseline solvers for nonconvex composite problems"};
  app.require_subcommand(1);
  app.fallthrough();
  bool quiet = false;
  bool verbose = false;
  app.add_flag("-q,--quiet", quiet, "Only print errors");
  app.add_flag("-v,--verbose", verbose, "Print progress messages");

  auto* run = app.add_subcommand("run", "Run the solvers of a configuration file");
  std::string config_path;
  std::uint64_t seed = 0;
  double epochs = 0.0;
  std::string out_dir;
  int threads = 0;
  run->add_option("config", config_path, "Configuration file")->required();
  auto* seed_opt = run->add_option("--seed", seed, "Override the random seed");
  auto* epochs_opt = run->add_option("--epochs", epochs, "Override the epoch budget");
  auto* out_opt = run->add_option("--out", out_dir, "Override the output directory");
  auto* threads_opt = run->add_option("--threads", threads, "Worker threads for full-gradient reductions");

  auto* verify = app.add_subcommand("verify", "Check estimator, step-size and solver identities");
  double omega_scale = 1.0;
  verify->add_option("--perturb-omega", omega_scale, "Scale the constant-step variance ratio (self-test)")
      ->group("");

  auto* presets = app.add_subcommand("presets", "List or describe solver presets");
  presets->require_subcommand(1);
  presets->fallthrough();
  presets->add_subcommand("list", "List all presets");
  auto* describe = presets->add_subcommand("describe", "Show derived parameters of a preset");
  std::string preset_name;
  long long n = 10000;
  double L = 1.0;
  describe->add_option("name", preset_name, "Preset name")->required();
  describe->add_option("--n", n, "Number of components")->capture_default_str();
  describe->add_option("--L", L, "Smoothness constant")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  using proxsarah::log::Level;
  proxsarah::log::set_level(quiet ? Level::kQuiet : (verbose ? Level::kInfo : Level::kWarn));

  try {
    if (run->parsed()) {
      proxsarah::RunOverrides overrides;
      if (*seed_opt) overrides.seed = seed;
      if (*epochs_opt) overrides.epochs = epochs;
      if (*out_opt) overrides.output_dir = out_dir;
      if (*threads_opt) overrides.threads = threads;
      return cmd_run(config_path, overrides);
    }
    if (verify->parsed()) return cmd_verify(omega_scale);
    if (describe->parsed()) {
      if (n <= 0) throw proxsarah::ConfigError("--n must be >= 1");
      std::cout << proxsarah::describe_preset(preset_name, static_cast<std::size_t>(n), L);
      return kOk;
    }
    return cmd_presets_list();
  } catch (const proxsarah::ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const proxsarah::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const proxsarah::InvalidArgument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return kUsage;
  } catch (const proxsarah::UnsupportedOperation& e) {
    std::cerr << "unsupported: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
}
