#include <doctest.h>

#include "proxsarah/core.hpp"
#include "proxsarah/errors.hpp"
#include "proxsarah/problems.hpp"

#include <cmath>
#include <memory>

using namespace proxsarah;

namespace {
Dataset one_row(std::vector<FeatureIndex> idx, std::vector<double> val, double label, std::size_t d) {
  Dataset ds(d);
  ds.add_row(idx, val, label);
  return ds;
}
}  // namespace

TEST_CASE("NN-PCA component value and gradient") {
  const NnPcaProblem p(one_row({0}, {1.0}, 0.0, 2));
  Vector w(2);
  w << 0.6, 0.8;
  CHECK(p.component_value(w, 0) == doctest::Approx(-0.18));
  Vector g = Vector::Zero(2);
  p.add_component_gradient(w, 0, 1.0, g);
  CHECK(g[0] == doctest::Approx(-0.6));
  CHECK(g[1] == 0.0);
  CHECK(p.lipschitz() == 1.0);
  CHECK_THROWS_AS(NnPcaProblem(one_row({0}, {2.0}, 0.0, 2)), InvalidArgument);
}

TEST_CASE("loss values at zero margin") {
  const Loss l1(Loss::Kind::kSigmoid), l2(Loss::Kind::kTwoLayer), l3(Loss::Kind::kLogisticDifference);
  CHECK(l1.value(0.0, 1.0) == 1.0);
  CHECK(l1.derivative(0.0, 1.0) == doctest::Approx(-1.0));
  CHECK(l2.value(0.0, 1.0) == doctest::Approx(0.25));
  CHECK(l2.derivative(0.0, 1.0) == doctest::Approx(-0.25));
  CHECK(l3.value(0.0, 1.0) == doctest::Approx(0.3798854930417224).epsilon(1e-14));
  CHECK(l3.derivative(0.0, 1.0) == doctest::Approx(-0.2310585786300049).epsilon(1e-14));
  CHECK(l3.derivative(0.0, -1.0) == doctest::Approx(0.2310585786300049).epsilon(1e-14));
}

TEST_CASE("loss smoothness constants") {
  CHECK(Loss(Loss::Kind::kSigmoid).smoothness() == doctest::Approx(4.0 * std::sqrt(3.0) / 9.0).epsilon(1e-15));
  CHECK(Loss(Loss::Kind::kSigmoid, 2.0).smoothness() == doctest::Approx(16.0 * std::sqrt(3.0) / 9.0));
  CHECK(Loss(Loss::Kind::kTwoLayer).smoothness() == 0.15405);
  CHECK(Loss(Loss::Kind::kLogisticDifference).smoothness() == 0.092372);
  // omega = 2: max |l3''| is found numerically and must bound a fine grid.
  const Loss l3(Loss::Kind::kLogisticDifference, 2.0);
  double peak = 0.0;
  for (int k = -4000; k <= 4000; ++k) peak = std::max(peak, std::abs(l3.second_derivative(k * 0.005, 1.0)));
  CHECK(l3.smoothness() >= peak - 1e-12);
  CHECK(l3.smoothness() <= peak + 1e-6);
}

TEST_CASE("losses are stable at extreme margins") {
  for (auto kind : {Loss::Kind::kSigmoid, Loss::Kind::kTwoLayer, Loss::Kind::kLogisticDifference}) {
    const Loss l(kind);
    for (double s : {-800.0, 800.0}) {
      CHECK(std::isfinite(l.value(s, 1.0)));
      CHECK(std::isfinite(l.derivative(s, 1.0)));
      CHECK(std::isfinite(l.second_derivative(s, -1.0)));
    }
  }
  CHECK(Loss::parse_kind("two-layer") == Loss::Kind::kTwoLayer);
  CHECK_THROWS(Loss::parse_kind("hinge"));
}

TEST_CASE("binary classification smoothness scales with the largest row") {
  Dataset ds(2);
  const std::vector<FeatureIndex> idx{0, 1};
  const std::vector<double> a{1.0, 1.0}, b{0.5, 0.0};
  ds.add_row(idx, a, 1.0);
  ds.add_row(idx, b, -1.0);
  const BinClassProblem p(ds, Loss(Loss::Kind::kTwoLayer));
  CHECK(p.lipschitz() == doctest::Approx(0.15405 * 2.0));
}

TEST_CASE("accuracy counts sign(0) as +1") {
  Dataset ds(1);
  const std::vector<FeatureIndex> idx{0};
  const std::vector<double> one{1.0};
  ds.add_row(idx, one, 1.0);
  ds.add_row(idx, one, -1.0);
  CHECK(accuracy(Vector::Zero(1), ds) == 0.5);
  CHECK(accuracy(Vector::Constant(1, -1.0), ds) == 0.5);
}

TEST_CASE("quadratic sum smoothness constant") {
  std::vector<Vector> h{Vector::Constant(1, 1.0), Vector::Constant(1, -3.0)};
  std::vector<Vector> g{Vector::Zero(1), Vector::Zero(1)};
  const QuadraticSum q(h, g);
  CHECK(q.lipschitz() == doctest::Approx(std::sqrt(5.0)));
  CHECK(empirical_smoothness_check(q, 50) <= 5.0 + 1e-9);
}

TEST_CASE("synthetic expectation oracle") {
  const SyntheticExpectation e = SyntheticExpectation::random(3, 2, 5);
  double total = 0.0;
  for (std::size_t k = 0; k < e.outcome_count(); ++k) total += e.outcome_probability(k);
  CHECK(total == doctest::Approx(1.0));
  // The same sample id always maps to the same outcome.
  CHECK(e.outcome_of(12345) == e.outcome_of(12345));
  CHECK(e.variance_at(Vector::Constant(2, 0.5)) <= e.sigma_squared() + 1e-12);
}

TEST_CASE("expectation view enumerates the base components") {
  auto base = std::make_shared<QuadraticSum>(QuadraticSum::random(7, 2, 3));
  const ExpectationView v(base, 11);
  CHECK(v.outcome_count() == 7);
  CHECK(v.outcome_probability(0) == doctest::Approx(1.0 / 7.0));
  const Vector w = Vector::Constant(2, 0.3);
  CHECK((exact_gradient(v, w) - exact_gradient(*base, w)).norm() < 1e-14);
  CHECK(v.component_of(99) < 7);
}
