#include <doctest.h>

#include "proxsarah/errors.hpp"
#include "proxsarah/log.hpp"
#include "proxsarah/stepsize.hpp"

#include <cmath>

using namespace proxsarah;

TEST_CASE("variance ratio constants") {
  CHECK(constant_step_omega(1, OracleMode::finite_sum(10000)) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(constant_step_omega(4, OracleMode::expectation()) == doctest::Approx(3.0 / 8.0));
  CHECK(adaptive_step_omega(0.5, 1, 2) == doctest::Approx(1.5));
  CHECK(noncomposite_rho(10, OracleMode::finite_sum(10)) == 0.0);
  CHECK(noncomposite_rho(2, OracleMode::finite_sum(5)) == doctest::Approx(3.0 / 8.0));
}

TEST_CASE("constant composite steps for a single sample and m = n") {
  const StepSchedule s = constant_composite(1.0, 10000, 1, OracleMode::finite_sum(10000));
  REQUIRE(s.m() == 10000);
  CHECK(s.gammas[0] == doctest::Approx(0.00816496580927726).epsilon(1e-13));
  CHECK(s.etas[0] == doctest::Approx(0.4989814583632502).epsilon(1e-13));
  CHECK(s.gammas[0] == s.gammas[10000]);
  CHECK(s.sigma_m == doctest::Approx(10001 * 0.00816496580927726).epsilon(1e-12));
  CHECK_FALSE(s.clamped);
}

TEST_CASE("constant composite rejects b_hat = n and clamps gamma > 1") {
  CHECK_THROWS_AS(constant_composite(1.0, 10, 10, OracleMode::finite_sum(10)), InvalidArgument);
  log::set_level(log::Level::kQuiet);
  const StepSchedule s = constant_composite(0.01, 4, 1, OracleMode::finite_sum(100));
  log::set_level(log::Level::kWarn);
  CHECK(s.clamped);
  CHECK(s.gammas[0] == 1.0);
  CHECK(s.sigma_m == 5.0);
}

TEST_CASE("adaptive composite recursion, two steps") {
  // eta = 1/2: delta = 1, omega = 1.5 for n = 2, b = 1.
  const StepSchedule s = adaptive_composite(1.0, 0.5, 1, 1, 2);
  REQUIRE(s.m() == 1);
  CHECK(s.gammas[1] == 1.0);
  CHECK(s.gammas[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(s.etas[0] == 0.5);
  CHECK(s.sigma_m == doctest::Approx(1.5));
  CHECK_THROWS_AS(adaptive_composite(1.0, 0.7, 3, 1, 10), InvalidArgument);
  CHECK_THROWS_AS(adaptive_composite(1.0, 0.5, 3, 10, 10), InvalidArgument);
}

TEST_CASE("adaptive composite unit-bracket form is increasing") {
  const StepSchedule s = adaptive_composite(2.0, 0.4, 30, 3, 100, AdaptiveForm::kUnitBracket);
  for (std::size_t t = 0; t < s.m(); ++t) CHECK(s.gammas[t] < s.gammas[t + 1]);
}

TEST_CASE("non-composite schedules") {
  const StepSchedule a = adaptive_noncomposite(1.0, 2, 0.5);
  CHECK(a.combined);
  CHECK(a.etas[2] == 1.0);
  CHECK(a.etas[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(a.etas[0] == doctest::Approx(6.0 / 11.0).epsilon(1e-15));
  CHECK(a.weight(0) == a.etas[0]);
  const StepSchedule f = fixed_noncomposite(1.0, 2);
  CHECK(f.etas[0] == doctest::Approx(0.5));
  CHECK(f.gammas[1] == 1.0);
}

TEST_CASE("generic recursion and its tightness") {
  const StepSchedule s = tight_backward_recursion(1.0, 1.0, 1.0, 2);
  CHECK(s.gammas[2] == 1.0);
  CHECK(s.gammas[1] == doctest::Approx(0.5));
  CHECK(s.gammas[0] == doctest::Approx(0.4));
  CHECK(tight_recursion_residual(s, 1.0, 1.0, 1.0) < 1e-15);
  const StepSchedule c = tight_constant_steps(2.0, 0.3, 1.7, 40);
  CHECK(c.sigma_m == doctest::Approx(41 * c.gammas[0]));
}

TEST_CASE("trade-off batch size and step") {
  const TradeoffChoice t = tradeoff_config(0.95, 1.0, 100, 10000);
  CHECK(t.c == doctest::Approx(0.7386888273314866).epsilon(1e-14));
  CHECK(t.b_hat == 133);
  CHECK(t.eta == doctest::Approx(0.40404040404040403).epsilon(1e-15));
  // Large m drives b_hat to n - 1.
  CHECK(tradeoff_config(0.95, 1.0, 1000000, 50).b_hat == 49);
  CHECK_THROWS_AS(tradeoff_config(0.1, 1.0, 5, 100), ConfigError);
  CHECK_THROWS_AS(tradeoff_config(1.5, 1.0, 5, 100), InvalidArgument);
}
