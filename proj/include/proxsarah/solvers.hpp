#pragma once

#include "proxsarah/core.hpp"
#include "proxsarah/metrics.hpp"
#include "proxsarah/prox.hpp"
#include "proxsarah/rng.hpp"
#include "proxsarah/stepsize.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace proxsarah {

/// How ProxSARAH obtains its (gamma_t, eta_t) schedule.
enum class ScheduleRule {
  kConstant,              // constant_composite
  kAdaptive,              // adaptive_composite with `eta` and `form`
  kTradeoff,              // tradeoff_config with `gamma_bar`; sets b_hat unless b_hat_fixed
  kAdaptiveNonComposite,  // adaptive_noncomposite, psi must be zero
  kFixedNonComposite,     // fixed_noncomposite, psi must be zero
  kExplicit,              // constant `gamma`, `eta`
  kCustom,                // `custom` schedule as given
};

std::string to_string(ScheduleRule rule);

struct ProxSarahConfig {
  ScheduleRule rule = ScheduleRule::kConstant;
  std::size_t m = 1;
  std::size_t b_hat = 1;
  std::size_t b_s = 0;  // 0: n in finite-sum mode; required in expectation mode
  double gamma_bar = 0.95;
  double eta = 0.5;
  double gamma = 1.0;
  AdaptiveForm form = AdaptiveForm::kEtaBracket;
  std::optional<StepSchedule> custom;
};

struct ProxSvrgConfig {
  std::size_t m = 1;
  std::size_t b_hat = 1;
  double eta = 0.0;  // must be set
};

struct ProxSpiderBoostConfig {
  std::size_t m = 1;
  std::size_t b_hat = 1;
  std::size_t b_s = 0;  // 0: n
  double eta = 0.0;
};

struct ProxSgdConfig {
  double eta0 = 0.1;
  double eta_tilde = 1.0;
  std::size_t b_hat = 1;
};

struct ProxGdConfig {
  double eta = 0.0;  // 0: 1/L
};

using Method = std::variant<ProxSarahConfig, ProxSvrgConfig, ProxSpiderBoostConfig, ProxSgdConfig, ProxGdConfig>;

enum class OutputRule { kLast, kWeightedRandom, kUniformRandom };

std::string to_string(OutputRule rule);
OutputRule parse_output_rule(const std::string& name);

struct SolverConfig {
  Method method = ProxSarahConfig{};
  double epochs = 1.0;
  /// Overrides the epoch budget with an exact outer-iteration (or step) count.
  std::optional<std::size_t> outer_iterations;
  std::uint64_t seed = 0;
  OutputRule output = OutputRule::kLast;
  /// Starting point; zero when absent. It is projected onto dom(psi) first.
  std::optional<Vector> w0;
  /// SFO calls per epoch. 0 means n in finite-sum mode and b_s in expectation mode.
  double epoch_reference = 0.0;
  Reduction reduction;
  TraceOptions trace;
  bool record_trace = true;
  /// Keep every candidate output iterate in RunResult::iterates (small problems only).
  bool keep_iterates = false;
};

struct IterateIndex {
  std::size_t outer = 0;  // 1-based
  std::size_t inner = 0;  // 0..m

  friend bool operator==(const IterateIndex&, const IterateIndex&) = default;
};

struct RunResult {
  Vector final_w;
  Vector selected_w;
  IterateIndex selected_index;
  RunTrace trace;
  Counters counters;
  std::size_t outer_iterations = 0;
  StepSchedule schedule;  // ProxSARAH only
  std::size_t b_hat = 0;  // resolved inner batch size (ProxSARAH-type loops)
  std::size_t b_s = 0;    // resolved snapshot batch size
  std::vector<Vector> iterates;
  std::vector<IterateIndex> iterate_indices;
};

/// Weighted reservoir of size one: after offering candidates with weights
/// w_1..w_K, candidate k is held with probability w_k / sum w.
class OutputSelector {
 public:
  OutputSelector(OutputRule rule, RngStream rng) : rule_(rule), rng_(rng) {}

  /// Offers a candidate; the Last rule keeps the most recent one.
  void offer(const Vector& w, double weight, IterateIndex index);

  bool empty() const { return !held_; }
  /// Throws StateError when nothing was offered.
  const Vector& selected() const;
  IterateIndex selected_index() const;

 private:
  OutputRule rule_;
  RngStream rng_;
  double total_ = 0.0;
  bool held_ = false;
  Vector w_;
  IterateIndex index_;
};

/// Picks one of `iterates` by `rule`; weights are used only by kWeightedRandom.
/// Returns the chosen position. Throws StateError when `iterates` is empty.
std::size_t select_output(std::span<const Vector> iterates, std::span<const double> weights, OutputRule rule,
                          RngStream& rng);

/// Outer iterations for ProxSARAH-type loops: ceil(epochs * ref / (b_s + 2 m b_hat)).
std::size_t outer_iterations_for(double epochs, double epoch_reference, std::size_t b_s, std::size_t m,
                                 std::size_t b_hat);

/// Resolves the schedule of a ProxSARAH config for an oracle mode and
/// constant L; for kTradeoff also returns the chosen b_hat. `zero_psi` tells
/// whether the regularizer is zero (required by the non-composite rules).
StepSchedule resolve_schedule(const ProxSarahConfig& cfg, const OracleMode& mode, double L, bool zero_psi,
                              std::size_t* b_hat_out = nullptr);

RunResult prox_sarah(const ProblemOracle& oracle, const Regularizer& reg, const SolverConfig& cfg);
RunResult prox_svrg(const ProblemOracle& oracle, const Regularizer& reg, const SolverConfig& cfg);
RunResult prox_spiderboost(const ProblemOracle& oracle, const Regularizer& reg, const SolverConfig& cfg);
RunResult prox_sgd(const ProblemOracle& oracle, const Regularizer& reg, const SolverConfig& cfg);
RunResult prox_gd(const ProblemOracle& oracle, const Regularizer& reg, const SolverConfig& cfg);

/// Dispatches on cfg.method.
RunResult run_solver(const ProblemOracle& oracle, const Regularizer& reg, const SolverConfig& cfg);

}  // namespace proxsarah
