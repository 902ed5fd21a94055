#include <doctest.h>

#include "proxsarah/errors.hpp"
#include "proxsarah/prox.hpp"

using namespace proxsarah;

namespace {
Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}
}  // namespace

TEST_CASE("soft threshold shrinks toward zero") {
  const Vector out = prox(Regularizer::l1(1.0), vec({3.0, -0.5, 0.0}), 1.0);
  CHECK(out[0] == 2.0);
  CHECK(out[1] == 0.0);
  CHECK(out[2] == 0.0);
  const Vector neg = prox(Regularizer::l1(0.5), vec({-2.0, 0.25}), 2.0);
  CHECK(neg[0] == -1.0);
  CHECK(neg[1] == 0.0);
}

TEST_CASE("nonnegative ball projection") {
  const Vector out = prox(Regularizer::nonneg_ball(), vec({3.0, 4.0, -1.0}), 0.3);
  CHECK(out[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(out[1] == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(out[2] == 0.0);
  const Vector inside = prox(Regularizer::nonneg_ball(), vec({0.1, 0.2}), 1.0);
  CHECK(inside == vec({0.1, 0.2}));
  CHECK(prox(Regularizer::nonneg_ball(), vec({-1.0, -2.0}), 1.0).norm() == 0.0);
}

TEST_CASE("zero regularizer is the identity and counts calls") {
  Counters c;
  const Vector w = vec({1.5, -2.0});
  CHECK(prox(Regularizer::zero(), w, 3.0, c) == w);
  CHECK(c.prox_calls == 1);
  CHECK(c.sfo == 0);
}

TEST_CASE("objective term") {
  CHECK(objective_term(Regularizer::l1(0.5), vec({1.0, -2.0})) == 1.5);
  CHECK(objective_term(Regularizer::zero(), vec({5.0})) == 0.0);
  CHECK(objective_term(Regularizer::nonneg_ball(), vec({0.6, 0.8})) == 0.0);
  CHECK(is_infeasible(objective_term(Regularizer::nonneg_ball(), vec({-0.1, 0.5}))));
  CHECK(is_infeasible(objective_term(Regularizer::nonneg_ball(), vec({1.0, 1.0}))));
}

TEST_CASE("gradient mapping reduces to the gradient without psi") {
  const Vector w = vec({1.0, 2.0});
  const Vector g = vec({0.5, -3.0});
  CHECK((gradient_mapping(w, g, 0.5, Regularizer::zero()) - g).norm() < 1e-15);
  // w - eta g = [0.75, 3.5], threshold 0.5 -> [0.25, 3.0], G = ([1,2]-[0.25,3])/0.5.
  const Vector G = gradient_mapping(w, g, 0.5, Regularizer::l1(1.0));
  CHECK(G[0] == doctest::Approx(1.5));
  CHECK(G[1] == doctest::Approx(-2.0));
}

TEST_CASE("invalid regularizer parameters") {
  CHECK_THROWS_AS(Regularizer::l1(-1.0), InvalidArgument);
  CHECK_THROWS_AS(Regularizer::nonneg_ball(0.0), InvalidArgument);
  CHECK_THROWS_AS(prox(Regularizer::l1(1.0), vec({1.0}), -1.0), InvalidArgument);
}
