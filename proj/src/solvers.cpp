#include "proxsarah/solvers.hpp"

#include "proxsarah/errors.hpp"
#include "proxsarah/estimators.hpp"

#include <cmath>
#include <memory>

namespace proxsarah {

std::string to_string(OutputRule rule) {
  switch (rule) {
    case OutputRule::kLast:
      return "last";
    case OutputRule::kWeightedRandom:
      return "weighted";
    case OutputRule::kUniformRandom:
      return "uniform";
  }
  return "last";
}

std::string to_string(ScheduleRule rule) {
  switch (rule) {
    case ScheduleRule::kConstant:
      return "constant";
    case ScheduleRule::kAdaptive:
      return "adaptive";
    case ScheduleRule::kTradeoff:
      return "tradeoff";
    case ScheduleRule::kAdaptiveNonComposite:
      return "adaptive-noncomposite";
    case ScheduleRule::kFixedNonComposite:
      return "fixed-noncomposite";
    case ScheduleRule::kExplicit:
      return "explicit";
    case ScheduleRule::kCustom:
      return "custom";
  }
  return "custom";
}

OutputRule parse_output_rule(const std::string& name) {
  if (name == "last") return OutputRule::kLast;
  if (name == "weighted") return OutputRule::kWeightedRandom;
  if (name == "uniform") return OutputRule::kUniformRandom;
  throw ConfigError("unknown output rule '" + name + "' (expected last, weighted or uniform)");
}

// ---------------------------------------------------------------------------
// Output selection

void OutputSelector::offer(const Vector& w, double weight, IterateIndex index) {
  if (rule_ == OutputRule::kLast) {
    w_ = w;
    index_ = index;
    held_ = true;
    return;
  }
  if (rule_ == OutputRule::kUniformRandom) weight = 1.0;
  if (!(weight > 0.0) || !std::isfinite(weight)) throw InvalidArgument("output weights must be positive and finite");
  total_ += weight;
  // One draw per offer keeps the stream position independent of the outcome.
  if (rng_.uniform01() * total_ < weight) {
    w_ = w;
    index_ = index;
    held_ = true;
  }
}

const Vector& OutputSelector::selected() const {
  if (!held_) throw StateError("no iterate was offered for output selection");
  return w_;
}

IterateIndex OutputSelector::selected_index() const {
  if (!held_) throw StateError("no iterate was offered for output selection");
  return index_;
}

std::size_t select_output(std::span<const Vector> iterates, std::span<const double> weights, OutputRule rule,
                          RngStream& rng) {
  if (iterates.empty()) throw StateError("cannot select an output from an empty trace");
  if (rule == OutputRule::kWeightedRandom && weights.size() != iterates.size()) {
    throw InvalidArgument("weighted output selection needs one weight per iterate");
  }
  OutputSelector selector(rule, rng);
  for (std::size_t k = 0; k < iterates.size(); ++k) {
    selector.offer(iterates[k], rule == OutputRule::kWeightedRandom ? weights[k] : 1.0, {1, k});
  }
  return selector.selected_index().inner;
}

// ---------------------------------------------------------------------------
// Shared plumbing

std::size_t outer_iterations_for(double epochs, double epoch_reference, std::size_t b_s, std::size_t m,
                                 std::size_t b_hat) {
  if (!(epochs > 0.0) || !std::isfinite(epochs)) throw ConfigError("epochs must be > 0");
  const double per_outer = static_cast<double>(b_s) + 2.0 * static_cast<double>(m) * static_cast<double>(b_hat);
  // The small slack keeps exact multiples (e.g. 20 * 1000 / 2000) from rounding up.
  return static_cast<std::size_t>(std::max(1.0, std::ceil(epochs * epoch_reference / per_outer - 1e-9)));
}

namespace {

struct RunContext {
  const ProblemOracle& oracle;
  const Regularizer& reg;
  const SolverConfig& cfg;
  OracleMode mode;
  double epoch_reference;
  Counters counters;
  Vector w;
  std::unique_ptr<TraceRecorder> recorder;
  OutputSelector selector;
  RunResult result;

  RunContext(const ProblemOracle& o, const Regularizer& r, const SolverConfig& c, double ref)
      : oracle(o),
        reg(r),
        cfg(c),
        mode(o.mode()),
        epoch_reference(ref),
        selector(c.output, RngStream(c.seed, stream_id(0, StreamPurpose::kOutputSelect))) {
    if (!(epoch_reference > 0.0)) throw ConfigError("epoch reference must be > 0 in expectation mode");
    const std::size_t d = oracle.dimension();
    if (cfg.w0) {
      if (static_cast<std::size_t>(cfg.w0->size()) != d) throw ConfigError("initial point has the wrong dimension");
      require_finite(*cfg.w0, "initial point");
      w = *cfg.w0;
    } else {
      w = Vector::Zero(static_cast<Eigen::Index>(d));
    }
    // Projection onto dom(psi); a no-op for the zero and l1 regularizers.
    w = prox(reg, w, 0.0);
    if (cfg.record_trace) {
      recorder = std::make_unique<TraceRecorder>(oracle, reg, epoch_reference, cfg.trace, cfg.reduction);
      recorder->record(w, counters);
    }
  }

  void offer(const Vector& x, double weight, IterateIndex index) {
    selector.offer(x, weight, index);
    if (cfg.keep_iterates) {
      result.iterates.push_back(x);
      result.iterate_indices.push_back(index);
    }
  }

  void maybe_record(const Vector& x) {
    if (recorder) recorder->maybe_record(x, counters);
  }

  void record(const Vector& x) {
    if (recorder) recorder->record(x, counters);
  }

  void check_finite(const Vector& x) const {
    if (!all_finite(x)) throw NumericalError("iterate became non-finite; the step size is likely too large");
  }

  RunResult finish(std::size_t outer) {
    record(w);
    result.final_w = w;
    if (selector.empty()) {
      result.selected_w = w;
      result.selected_index = {outer, 0};
    } else {
      result.selected_w = selector.selected();
      result.selected_index = selector.selected_index();
    }
    if (recorder) result.trace = recorder->take();
    result.counters = counters;
    result.outer_iterations = outer;
    return std::move(result);
  }
};

double finite_reference(const SolverConfig& cfg, const OracleMode& mode, double fallback) {
  if (cfg.epoch_reference > 0.0) return cfg.epoch_reference;
  return mode.is_finite_sum() ? static_cast<double>(mode.n) : fallback;
}

void require_finite_sum(const OracleMode& mode, const char* solver) {
  if (!mode.is_finite_sum()) throw UnsupportedOperation(std::string(solver) + " needs a finite-sum problem");
}

void require_batch(const OracleMode& mode, std::size_t b, const char* what) {
  if (b == 0) throw ConfigError(std::string(what) + " must be >= 1");
  if (mode.is_finite_sum() && b > mode.n) {
    throw ConfigError(std::string(what) + " = " + std::to_string(b) + " exceeds n = " + std::to_string(mode.n));
  }
}

std::size_t snapshot_size(const OracleMode& mode, std::size_t b_s) {
  if (mode.is_finite_sum()) {
    const std::size_t size = b_s == 0 ? mode.n : b_s;
    require_batch(mode, size, "snapshot batch b_s");
    return size;
  }
  if (b_s == 0) throw ConfigError("expectation mode needs an explicit snapshot batch b_s");
  return b_s;
}

void require_no_weighted(const SolverConfig& cfg, const char* solver) {
  if (cfg.output == OutputRule::kWeightedRandom) {
    throw ConfigError(std::string("weighted output selection needs a ProxSARAH schedule, not ") + solver);
  }
}

// w <- (1 - gamma) w + gamma what, exact when gamma == 1.
void average_into(Vector& w, const Vector& what, double gamma) {
  if (gamma == 1.0) {
    w = what;
  } else {
    w = (1.0 - gamma) * w + gamma * what;
  }
}

void check_schedule(const StepSchedule& s) {
  if (s.gammas.empty() || s.gammas.size() != s.etas.size()) throw ConfigError("schedule needs m+1 (gamma, eta) pairs");
  for (std::size_t t = 0; t < s.gammas.size(); ++t) {
    if (!(s.gammas[t] > 0.0 && s.gammas[t] <= 1.0)) throw ConfigError("schedule gammas must lie in (0, 1]");
    if (!(s.etas[t] > 0.0) || !std::isfinite(s.etas[t])) throw ConfigError("schedule etas must be > 0");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// ProxSARAH

StepSchedule resolve_schedule(const ProxSarahConfig& cfg, const OracleMode& mode, double L, bool zero_psi,
                              std::size_t* b_hat_out) {
  std::size_t b_hat = cfg.b_hat;
  StepSchedule schedule;
  auto need_finite = [&](const char* rule) {
    if (!mode.is_finite_sum()) throw ConfigError(std::string(rule) + " step rule needs a finite-sum problem");
  };
  auto need_proper_batch = [&] {
    if (mode.is_finite_sum() && b_hat > mode.n - 1) {
      throw ConfigError("b_hat must be <= n-1 for this step rule (got b_hat = " + std::to_string(b_hat) +
                        ", n = " + std::to_string(mode.n) + ")");
    }
  };
  if (cfg.rule != ScheduleRule::kCustom && cfg.m == 0) throw ConfigError("inner length m must be >= 1");
  switch (cfg.rule) {
    case ScheduleRule::kConstant:
      need_proper_batch();
      schedule = constant_composite(L, cfg.m, b_hat, mode);
      break;
    case ScheduleRule::kAdaptive:
      need_finite("adaptive");
      need_proper_batch();
      if (!(cfg.eta > 0.0 && cfg.eta < 2.0 / 3.0)) throw ConfigError("adaptive step rule needs 0 < eta < 2/3");
      schedule = adaptive_composite(L, cfg.eta, cfg.m, b_hat, mode.n, cfg.form);
      break;
    case ScheduleRule::kTradeoff: {
      need_finite("trade-off");
      if (!(cfg.gamma_bar > 0.0 && cfg.gamma_bar <= 1.0)) throw ConfigError("gamma_bar must lie in (0, 1]");
      const TradeoffChoice choice = tradeoff_config(cfg.gamma_bar, L, cfg.m, mode.n);
      b_hat = choice.b_hat;
      schedule = constant_schedule(cfg.gamma_bar, choice.eta, cfg.m);
      break;
    }
    case ScheduleRule::kAdaptiveNonComposite:
      if (!zero_psi) throw ConfigError("non-composite step rules need psi = 0");
      need_proper_batch();
      schedule = adaptive_noncomposite(L, cfg.m, noncomposite_rho(b_hat, mode));
      break;
    case ScheduleRule::kFixedNonComposite:
      if (!zero_psi) throw ConfigError("non-composite step rules need psi = 0");
      schedule = fixed_noncomposite(L, cfg.m);
      break;
    case ScheduleRule::kExplicit:
      schedule = constant_schedule(cfg.gamma, cfg.eta, cfg.m);
      break;
    case ScheduleRule::kCustom:
      if (!cfg.custom) throw ConfigError("custom step rule without a schedule");
      schedule = *cfg.custom;
      break;
  }
  check_schedule(schedule);
  if (b_hat_out) *b_hat_out = b_hat;
  return schedule;
}

RunResult prox_sarah(const ProblemOracle& oracle, const Regularizer& reg, const SolverConfig& cfg) {
  const auto* pc = std::get_if<ProxSarahConfig>(&cfg.method);
  if (!pc) throw ConfigError("prox_sarah called with a different method");
  const OracleMode mode = oracle.mode();
  const std::size_t b_s = snapshot_size(mode, pc->b_s);
  std::size_t b_hat = pc->b_hat;
  StepSchedule schedule = resolve_schedule(*pc, mode, oracle.lipschitz(), reg.kind() == Regularizer::Kind::kZero, &b_hat);
  require_batch(mode, b_hat, "inner batch b_hat");
  const std::size_t m = schedule.m();

  RunContext ctx(oracle, reg, cfg, finite_reference(cfg, mode, static_cast<double>(b_s)));
  const std::size_t outer =
      cfg.outer_iterations ? *cfg.outer_iterations : outer_iterations_for(cfg.epochs, ctx.epoch_reference, b_s, m, b_hat);

  for (std::size_t s = 1; s <= outer; ++s) {
    RngStream snapshot_rng(cfg.seed, stream_id(s, StreamPurpose::kSnapshot));
    RngStream inner_rng(cfg.seed, stream_id(s, StreamPurpose::kInnerBatch));

    SarahState state = sarah_snapshot(oracle, ctx.w, b_s, snapshot_rng, ctx.counters, cfg.reduction);
    ctx.offer(ctx.w, schedule.weight(0), {s, 0});
    Vector what = prox(reg, ctx.w - schedule.etas[0] * state.v, schedule.etas[0], ctx.counters);
    Vector w_next = ctx.w;
    average_into(w_next, what, schedule.gammas[0]);

    for (std::size_t t = 1; t <= m; ++t) {
      ctx.w = std::move(w_next);
      ctx.check_finite(ctx.w);
      ctx.offer(ctx.w, schedule.weight(t), {s, t});
      const MiniBatch batch = draw_batch(oracle, inner_rng, b_hat);
      state = sarah_update(std::move(state), oracle, ctx.w, batch, ctx.counters);
      what = prox(reg, ctx.w - schedule.etas[t] * state.v, schedule.etas[t], ctx.counters);
      w_next = ctx.w;
      average_into(w_next, what, schedule.gammas[t]);
      ctx.maybe_record(w_next);
    }
    ctx.w = std::move(w_next);
    ctx.check_finite(ctx.w);
    ctx.record(ctx.w);
  }
  ctx.result.schedule = schedule;
  ctx.result.b_hat = b_hat;
  ctx.result.b_s = b_s;
  return ctx.finish(outer);
}

// ---------------------------------------------------------------------------
// Baselines

RunResult prox_spiderboost(const ProblemOracle& oracle, const Regularizer& reg, const SolverConfig& cfg) {
  const auto* pc = std::get_if<ProxSpiderBoostConfig>(&cfg.method);
  if (!pc) throw ConfigError("prox_spiderboost called with a different method");
  require_no_weighted(cfg, "ProxSpiderBoost");
  const OracleMode mode = oracle.mode();
  const std::size_t b_s = snapshot_size(mode, pc->b_s);
  require_batch(mode, pc->b_hat, "inner batch b_hat");
  if (pc->m == 0) throw ConfigError("inner length m must be >= 1");
  if (!(pc->eta > 0.0)) throw ConfigError("ProxSpiderBoost step eta must be > 0");
  const double eta = pc->eta;

  RunContext ctx(oracle, reg, cfg, finite_reference(cfg, mode, static_cast<double>(b_s)));
  const std::size_t outer = cfg.outer_iterations
                                ? *cfg.outer_iterations
                                : outer_iterations_for(cfg.epochs, ctx.epoch_reference, b_s, pc->m, pc->b_hat);

  for (std::size_t s = 1; s <= outer; ++s) {
    RngStream snapshot_rng(cfg.seed, stream_id(s, StreamPurpose::kSnapshot));
    RngStream inner_rng(cfg.seed, stream_id(s, StreamPurpose::kInnerBatch));
    SarahState state = sarah_snapshot(oracle, ctx.w, b_s, snapshot_rng, ctx.counters, cfg.reduction);
    ctx.offer(ctx.w, 1.0, {s, 0});
    Vector w_next = prox(reg, ctx.w - eta * state.v, eta, ctx.counters);
    for (std::size_t t = 1; t <= pc->m; ++t) {
      ctx.w = std::move(w_next);
      ctx.check_finite(ctx.w);
      ctx.offer(ctx.w, 1.0, {s, t});
      const MiniBatch batch = draw_batch(oracle, inner_rng, pc->b_hat);
      state = sarah_update(std::move(state), oracle, ctx.w, batch, ctx.counters);
      w_next = prox(reg, ctx.w - eta * state.v, eta, ctx.counters);
      ctx.maybe_record(w_next);
    }
    ctx.w = std::move(w_next);
    ctx.check_finite(ctx.w);
    ctx.record(ctx.w);
  }
  return ctx.finish(outer);
}

RunResult prox_svrg(const ProblemOracle& oracle, const Regularizer& reg, const SolverConfig& cfg) {
  const auto* pc = std::get_if<ProxSvrgConfig>(&cfg.method);
  if (!pc) throw ConfigError("prox_svrg called with a different method");
  require_no_weighted(cfg, "ProxSVRG");
  const OracleMode mode = oracle.mode();
  require_finite_sum(mode, "ProxSVRG");
  require_batch(mode, pc->b_hat, "inner batch b_hat");
  if (pc->m == 0) throw ConfigError("inner length m must be >= 1");
  if (!(pc->eta > 0.0)) throw ConfigError("ProxSVRG step eta must be > 0");
  const double eta = pc->eta;

  RunContext ctx(oracle, reg, cfg, finite_reference(cfg, mode, 0.0));
  const std::size_t outer = cfg.outer_iterations
                                ? *cfg.outer_iterations
                                : outer_iterations_for(cfg.epochs, ctx.epoch_reference, mode.n, pc->m, pc->b_hat);

  for (std::size_t s = 1; s <= outer; ++s) {
    RngStream inner_rng(cfg.seed, stream_id(s, StreamPurpose::kInnerBatch));
    const Vector snapshot_w = ctx.w;
    const Vector snapshot_grad = full_gradient(oracle, snapshot_w, ctx.counters, cfg.reduction);
    for (std::size_t t = 0; t < pc->m; ++t) {
      ctx.offer(ctx.w, 1.0, {s, t});
      const MiniBatch batch = draw_batch(oracle, inner_rng, pc->b_hat);
      const Vector g = svrg_estimator(oracle, ctx.w, snapshot_w, snapshot_grad, batch, ctx.counters);
      ctx.w = prox(reg, ctx.w - eta * g, eta, ctx.counters);
      ctx.check_finite(ctx.w);
      ctx.maybe_record(ctx.w);
    }
    ctx.record(ctx.w);
  }
  return ctx.finish(outer);
}

RunResult prox_sgd(const ProblemOracle& oracle, const Regularizer& reg, const SolverConfig& cfg) {
  const auto* pc = std::get_if<ProxSgdConfig>(&cfg.method);
  if (!pc) throw ConfigError("prox_sgd called with a different method");
  require_no_weighted(cfg, "ProxSGD");
  const OracleMode mode = oracle.mode();
  require_batch(mode, pc->b_hat, "batch b_hat");
  if (!(pc->eta0 > 0.0)) throw ConfigError("ProxSGD eta0 must be > 0");
  if (!(pc->eta_tilde >= 0.0)) throw ConfigError("ProxSGD eta_tilde must be >= 0");
  if (!mode.is_finite_sum() && !(cfg.epoch_reference > 0.0)) {
    throw ConfigError("ProxSGD in expectation mode needs an explicit epoch reference");
  }

  RunContext ctx(oracle, reg, cfg, finite_reference(cfg, mode, 0.0));
  // The decay counts epochs of n draws in finite-sum mode.
  const double decay_period = mode.is_finite_sum() ? static_cast<double>(mode.n) : ctx.epoch_reference;
  const std::size_t steps =
      cfg.outer_iterations
          ? *cfg.outer_iterations
          : static_cast<std::size_t>(
                std::max(1.0, std::ceil(cfg.epochs * ctx.epoch_reference / static_cast<double>(pc->b_hat) - 1e-9)));

  RngStream rng(cfg.seed, stream_id(0, StreamPurpose::kSgdBatch));
  std::uint64_t draws = 0;
  for (std::size_t k = 0; k < steps; ++k) {
    ctx.offer(ctx.w, 1.0, {1, k});
    const double eta =
        pc->eta0 / (1.0 + pc->eta_tilde * std::floor(static_cast<double>(draws) / decay_period));
    const MiniBatch batch = draw_batch(oracle, rng, pc->b_hat);
    const Vector g = batch_mean_gradient(oracle, ctx.w, batch.ids, ctx.counters);
    draws += batch.size();
    ctx.w = prox(reg, ctx.w - eta * g, eta, ctx.counters);
    ctx.check_finite(ctx.w);
    ctx.maybe_record(ctx.w);
  }
  return ctx.finish(steps);
}

RunResult prox_gd(const ProblemOracle& oracle, const Regularizer& reg, const SolverConfig& cfg) {
  const auto* pc = std::get_if<ProxGdConfig>(&cfg.method);
  if (!pc) throw ConfigError("prox_gd called with a different method");
  require_no_weighted(cfg, "ProxGD");
  const OracleMode mode = oracle.mode();
  require_finite_sum(mode, "ProxGD");
  const double eta = pc->eta > 0.0 ? pc->eta : 1.0 / oracle.lipschitz();

  RunContext ctx(oracle, reg, cfg, finite_reference(cfg, mode, 0.0));
  const std::size_t steps =
      cfg.outer_iterations
          ? *cfg.outer_iterations
          : static_cast<std::size_t>(std::max(
                1.0, std::ceil(cfg.epochs * ctx.epoch_reference / static_cast<double>(mode.n) - 1e-9)));
  for (std::size_t k = 0; k < steps; ++k) {
    ctx.offer(ctx.w, 1.0, {1, k});
    const Vector g = full_gradient(oracle, ctx.w, ctx.counters, cfg.reduction);
    ctx.w = prox(reg, ctx.w - eta * g, eta, ctx.counters);
    ctx.check_finite(ctx.w);
    ctx.maybe_record(ctx.w);
  }
  return ctx.finish(steps);
}

RunResult run_solver(const ProblemOracle& oracle, const Regularizer& reg, const SolverConfig& cfg) {
  struct Visitor {
    const ProblemOracle& oracle;
    const Regularizer& reg;
    const SolverConfig& cfg;
    RunResult operator()(const ProxSarahConfig&) const { return prox_sarah(oracle, reg, cfg); }
    RunResult operator()(const ProxSvrgConfig&) const { return prox_svrg(oracle, reg, cfg); }
    RunResult operator()(const ProxSpiderBoostConfig&) const { return prox_spiderboost(oracle, reg, cfg); }
    RunResult operator()(const ProxSgdConfig&) const { return prox_sgd(oracle, reg, cfg); }
    RunResult operator()(const ProxGdConfig&) const { return prox_gd(oracle, reg, cfg); }
  };
  return std::visit(Visitor{oracle, reg, cfg}, cfg.method);
}

}  // namespace proxsarah
