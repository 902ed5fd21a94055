#include <doctest.h>

#include "proxsarah/errors.hpp"
#include "proxsarah/log.hpp"
#include "proxsarah/presets.hpp"
#include "proxsarah/problems.hpp"
#include "proxsarah/solvers.hpp"

#include <cmath>
#include <limits>
#include <vector>

using namespace proxsarah;

namespace {
SolverConfig base_config(Method method, std::uint64_t seed = 1) {
  SolverConfig cfg;
  cfg.method = std::move(method);
  cfg.seed = seed;
  cfg.record_trace = false;
  return cfg;
}
}  // namespace

TEST_CASE("outer iteration budget") {
  CHECK(outer_iterations_for(1.0, 100, 100, 10, 5) == 1);
  CHECK(outer_iterations_for(3.0, 100, 100, 10, 5) == 2);
  CHECK(outer_iterations_for(2.0, 100, 100, 25, 1) == 2);
}

TEST_CASE("counter accounting of a ProxSARAH run") {
  const QuadraticSum q = QuadraticSum::random(20, 3, 2);
  ProxSarahConfig pc;
  pc.rule = ScheduleRule::kExplicit;
  pc.gamma = 0.5;
  pc.eta = 0.2;
  pc.m = 6;
  pc.b_hat = 3;
  SolverConfig cfg = base_config(pc);
  cfg.outer_iterations = 4;
  const RunResult r = prox_sarah(q, Regularizer::l1(0.01), cfg);
  CHECK(r.outer_iterations == 4);
  CHECK(r.counters.sfo == 4 * (20 + 2 * 6 * 3));
  CHECK(r.counters.prox_calls == 4 * (6 + 1));
  CHECK(r.b_s == 20);
}

TEST_CASE("ProxGD converges on a strongly convex quadratic") {
  const QuadraticSum q({Vector::Constant(2, 2.0)}, {Vector::Constant(2, -2.0)});
  SolverConfig cfg = base_config(ProxGdConfig{});
  cfg.outer_iterations = 60;
  const RunResult r = prox_gd(q, Regularizer::zero(), cfg);
  // Minimizer of w^2 - 2w is 1; step 1/L = 1/2 lands there in one step.
  CHECK((r.final_w - Vector::Ones(2)).norm() < 1e-12);
  CHECK(r.counters.sfo == 60);
}

TEST_CASE("ProxSGD step count and decay") {
  const QuadraticSum q = QuadraticSum::random(10, 2, 1);
  SolverConfig cfg = base_config(ProxSgdConfig{0.1, 1.0, 2});
  cfg.epochs = 3.0;
  const RunResult r = prox_sgd(q, Regularizer::zero(), cfg);
  CHECK(r.counters.sfo == 30);
  CHECK(r.counters.prox_calls == 15);
}

TEST_CASE("same seed gives the same trajectory, another seed does not") {
  const QuadraticSum q = QuadraticSum::random(30, 4, 7);
  ProxSarahConfig pc;
  pc.rule = ScheduleRule::kExplicit;
  pc.gamma = 0.8;
  pc.eta = 0.3;
  pc.m = 10;
  pc.b_hat = 2;
  SolverConfig a = base_config(pc, 5);
  a.epochs = 3;
  a.w0 = Vector::Constant(4, 0.5);
  SolverConfig b = a;
  SolverConfig c = a;
  c.seed = 6;
  b.reduction.threads = 4;
  const RunResult ra = prox_sarah(q, Regularizer::l1(0.05), a);
  const RunResult rb = prox_sarah(q, Regularizer::l1(0.05), b);
  const RunResult rc = prox_sarah(q, Regularizer::l1(0.05), c);
  CHECK(ra.final_w == rb.final_w);
  CHECK(ra.final_w != rc.final_w);
}

TEST_CASE("nonnegative ball iterates stay feasible on NN-PCA") {
  const NnPcaProblem p(synth_nnpca(200, 10, 3));
  SolverConfig cfg = base_config(ProxSarahConfig{ScheduleRule::kConstant, 200, 1});
  cfg.w0 = Vector::Ones(10);
  cfg.epochs = 2;
  cfg.keep_iterates = true;
  const RunResult r = prox_sarah(p, Regularizer::nonneg_ball(), cfg);
  for (const Vector& w : r.iterates) {
    CHECK(w.minCoeff() >= 0.0);
    CHECK(w.norm() <= 1.0 + 1e-12);
  }
  CHECK(r.iterates.size() == r.outer_iterations * 201);
}

TEST_CASE("output selector rules") {
  OutputSelector last(OutputRule::kLast, RngStream(1, 1));
  CHECK(last.empty());
  CHECK_THROWS_AS(last.selected(), StateError);
  last.offer(Vector::Zero(1), 1.0, {1, 0});
  last.offer(Vector::Ones(1), 1.0, {1, 1});
  CHECK(last.selected_index() == IterateIndex{1, 1});

  RngStream rng(9, 9);
  const std::vector<Vector> its{Vector::Zero(1), Vector::Ones(1), Vector::Constant(1, 2.0)};
  const std::vector<double> weights{1e-12, 1.0, 1e-12};
  for (int k = 0; k < 50; ++k) CHECK(select_output(its, weights, OutputRule::kWeightedRandom, rng) == 1);
  CHECK(select_output(its, weights, OutputRule::kLast, rng) == 2);
  const std::vector<double> zero{0.0, 1.0, 1.0};
  CHECK_THROWS_AS(select_output(its, zero, OutputRule::kWeightedRandom, rng), InvalidArgument);
  CHECK_THROWS_AS(select_output(std::span<const Vector>{}, weights, OutputRule::kLast, rng), StateError);
  CHECK(parse_output_rule("weighted") == OutputRule::kWeightedRandom);
  CHECK_THROWS(parse_output_rule("median"));
}

TEST_CASE("baselines reject the weighted output rule") {
  const QuadraticSum q = QuadraticSum::random(10, 2, 1);
  SolverConfig cfg = base_config(ProxGdConfig{});
  cfg.output = OutputRule::kWeightedRandom;
  CHECK_THROWS(run_solver(q, Regularizer::zero(), cfg));
}

TEST_CASE("non-composite rules require psi = 0") {
  const QuadraticSum q = QuadraticSum::random(10, 2, 1);
  ProxSarahConfig pc;
  pc.rule = ScheduleRule::kFixedNonComposite;
  pc.m = 5;
  CHECK_THROWS(resolve_schedule(pc, q.mode(), q.lipschitz(), false));
  CHECK(resolve_schedule(pc, q.mode(), q.lipschitz(), true).combined);
}

TEST_CASE("trade-off rule resolves b_hat") {
  ProxSarahConfig pc;
  pc.rule = ScheduleRule::kTradeoff;
  pc.gamma_bar = 0.95;
  pc.m = 100;
  std::size_t b_hat = 0;
  const StepSchedule s = resolve_schedule(pc, OracleMode::finite_sum(10000), 1.0, false, &b_hat);
  CHECK(b_hat == 133);
  CHECK(s.gammas[0] == 0.95);
}

TEST_CASE("diverging runs raise a numerical error") {
  const QuadraticSum q({Vector::Constant(1, -1.0)}, {Vector::Zero(1)});
  SolverConfig cfg = base_config(ProxGdConfig{1e300});
  cfg.w0 = Vector::Ones(1);
  cfg.outer_iterations = 5;
  CHECK_THROWS_AS(prox_gd(q, Regularizer::zero(), cfg), NumericalError);
}

TEST_CASE("per-epoch best gradient mapping does not rebound for constant-step variants") {
  const std::size_t n = 1000, d = 50;
  const NnPcaProblem p(synth_nnpca(n, d, 42));
  for (const char* preset : {"v1", "v2", "v3", "v4", "v5"}) {
    SolverConfig cfg;
    cfg.method = make_preset(preset, n, 1.0);
    cfg.epochs = 10;
    cfg.seed = 42;
    cfg.w0 = Vector::Constant(static_cast<Eigen::Index>(d), 1.0 / std::sqrt(static_cast<double>(d)));
    const RunResult r = prox_sarah(p, Regularizer::nonneg_ball(), cfg);
    std::vector<double> best(12, std::numeric_limits<double>::infinity());
    for (const TraceRow& row : r.trace.rows) {
      const auto epoch = static_cast<std::size_t>(std::ceil(row.epoch_fraction - 1e-12));
      if (epoch < best.size()) best[epoch] = std::min(best[epoch], row.grad_map_norm_sq);
    }
    for (std::size_t k = 2; k < best.size(); ++k) {
      if (std::isinf(best[k]) || std::isinf(best[k - 1])) continue;
      CHECK_MESSAGE(best[k] <= 1.1 * best[k - 1], preset << " epoch " << k);
    }
  }
}
