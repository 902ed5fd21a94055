#include <doctest.h>

#include "proxsarah/errors.hpp"
#include "proxsarah/estimators.hpp"
#include "proxsarah/metrics.hpp"
#include "proxsarah/problems.hpp"

#include <cmath>
#include <limits>

using namespace proxsarah;

namespace {
QuadraticSum identity_quadratic(std::size_t d) {
  return QuadraticSum({Vector::Ones(static_cast<Eigen::Index>(d))}, {Vector::Zero(static_cast<Eigen::Index>(d))});
}
}  // namespace

TEST_CASE("relative residual") {
  CHECK(rel_residual(-1.5, -2.0).value == doctest::Approx(0.25));
  CHECK(rel_residual(3.0, 2.0).value == doctest::Approx(0.5));
  const Residual abs = rel_residual(0.125, 0.0);
  CHECK(abs.absolute);
  CHECK(abs.value == 0.125);
  CHECK_THROWS(rel_residual(1.0, std::numeric_limits<double>::quiet_NaN()));
}

TEST_CASE("gradient mapping norm uses the exact gradient") {
  // f(w) = |w|^2/2, psi = 0: G = w.
  const QuadraticSum q = identity_quadratic(3);
  Vector w(3);
  w << 1.0, -2.0, 2.0;
  CHECK(grad_mapping_norm_sq(q, Regularizer::zero(), w) == doctest::Approx(9.0));
  // With l1(1) and eta 0.5: w - 0.5 w = [0.5,-1,1] -> threshold 0.5 -> [0,-0.5,0.5]; G = 2([1,-2,2]-[0,-.5,.5]).
  CHECK(grad_mapping_norm_sq(q, Regularizer::l1(1.0), w) == doctest::Approx(4.0 * (1.0 + 2.25 + 2.25)));
  CHECK(composite_objective(q, Regularizer::l1(1.0), w) == doctest::Approx(4.5 + 5.0));
}

TEST_CASE("apply_reference fills every row") {
  RunTrace t;
  t.rows.resize(2);
  t.rows[0].objective = -1.0;
  t.rows[1].objective = -2.0;
  apply_reference(t, -2.0);
  CHECK(t.f_star == -2.0);
  CHECK(t.rows[0].rel_residual == doctest::Approx(0.5));
  CHECK(t.rows[1].rel_residual == 0.0);
  CHECK_FALSE(t.absolute_residual);
  apply_reference(t, 0.0);
  CHECK(t.absolute_residual);
  CHECK(t.rows[1].rel_residual == -2.0);
}

TEST_CASE("trace recorder stride and strict monotonicity") {
  const QuadraticSum q = identity_quadratic(2);
  const Regularizer reg = Regularizer::zero();
  TraceOptions opt;
  opt.rows_per_epoch = 4;
  TraceRecorder rec(q, reg, 100.0, opt);
  const Vector w = Vector::Ones(2);
  Counters c;
  rec.record(w, c);
  rec.record(w, c);  // same sfo: ignored
  for (int k = 1; k <= 100; ++k) {
    c.sfo = k;
    rec.maybe_record(w, c);
  }
  const RunTrace& t = rec.trace();
  REQUIRE(t.rows.size() == 5);
  CHECK(t.rows[1].epoch_fraction == doctest::Approx(0.25));
  CHECK(t.rows[4].epoch_fraction == doctest::Approx(1.0));
  for (const TraceRow& r : t.rows) CHECK(r.wall_ms == 0);
  CHECK_FALSE(t.rows[0].train_acc.has_value());
}

TEST_CASE("non-enumerable expectation oracle uses validation ids") {
  // A finite-sum problem viewed through an expectation wrapper that hides its law.
  struct Hidden final : ProblemOracle {
    OracleMode mode() const override { return OracleMode::expectation(); }
    std::size_t dimension() const override { return 1; }
    double lipschitz() const override { return 1.0; }
    void add_component_gradient(const Vector& w, SampleId i, double scale, Vector& out) const override {
      CHECK((i & kValidationIdBit) != 0);
      out += scale * w;
    }
    double component_value(const Vector& w, SampleId) const override { return 0.5 * w.squaredNorm(); }
  } hidden;
  const Vector w = Vector::Constant(1, 2.0);
  CHECK(grad_mapping_norm_sq(hidden, Regularizer::zero(), w, 0.5, 16) == doctest::Approx(4.0));
}
