#include <doctest.h>

#include "proxsarah/core.hpp"
#include "proxsarah/errors.hpp"
#include "proxsarah/problems.hpp"

#include <vector>

using namespace proxsarah;

namespace {
// f_i(w) = (h_i/2) w^2 + g_i w in one dimension.
QuadraticSum scalar_quadratics(const std::vector<double>& h, const std::vector<double>& g) {
  std::vector<Vector> hs, gs;
  for (std::size_t i = 0; i < h.size(); ++i) {
    hs.push_back(Vector::Constant(1, h[i]));
    gs.push_back(Vector::Constant(1, g[i]));
  }
  return QuadraticSum(hs, gs);
}
}  // namespace

TEST_CASE("full gradient averages components and counts n") {
  const QuadraticSum q = scalar_quadratics({1.0, -2.0, 4.0}, {0.5, 0.0, -1.0});
  Counters c;
  const Vector g = full_gradient(q, Vector::Constant(1, 2.0), c);
  // (2 + 0.5 - 4 + 8 - 1) / 3
  CHECK(g[0] == doctest::Approx(5.5 / 3.0).epsilon(1e-15));
  CHECK(c.sfo == 3);
  CHECK(c.prox_calls == 0);
}

TEST_CASE("batch helpers count per component") {
  const QuadraticSum q = scalar_quadratics({1.0, 3.0}, {0.0, 1.0});
  Counters c;
  const std::vector<SampleId> ids{0, 1};
  const Vector g = batch_mean_gradient(q, Vector::Constant(1, 1.0), ids, c);
  CHECK(g[0] == doctest::Approx(2.5));
  CHECK(c.sfo == 2);
  const Vector d = batch_mean_difference(q, Vector::Constant(1, 2.0), Vector::Constant(1, 1.0), ids, c);
  CHECK(d[0] == doctest::Approx(2.0));
  CHECK(c.sfo == 6);
  CHECK_THROWS_AS(batch_mean_gradient(q, Vector::Constant(1, 1.0), std::vector<SampleId>{}, c), InvalidArgument);
  CHECK_THROWS_AS(component_gradient(q, Vector::Constant(1, 1.0), 2, c), InvalidArgument);
}

TEST_CASE("pairwise tree sum is independent of thread count") {
  const std::size_t n = 1000;
  auto item = [](std::size_t i) { return 1.0 / static_cast<double>(i + 1) + 1e-17 * static_cast<double>(i); };
  const double one = pairwise_tree_sum(n, item, Reduction{1});
  for (int threads : {2, 3, 4, 8}) CHECK(pairwise_tree_sum(n, item, Reduction{threads}) == one);

  const QuadraticSum q = QuadraticSum::random(777, 5, 3);
  Counters c1, c4;
  const Vector w = Vector::LinSpaced(5, -1.0, 1.0);
  const Vector g1 = full_gradient(q, w, c1, Reduction{1});
  const Vector g4 = full_gradient(q, w, c4, Reduction{4});
  CHECK(g1 == g4);
  CHECK(c1 == c4);
}

TEST_CASE("exact gradient matches the counted full gradient") {
  const QuadraticSum q = QuadraticSum::random(10, 3, 11);
  Counters c;
  const Vector w = Vector::Constant(3, 0.3);
  CHECK((exact_gradient(q, w) - full_gradient(q, w, c)).norm() == 0.0);
}

TEST_CASE("expectation mode rejects full gradients") {
  const SyntheticExpectation e = SyntheticExpectation::random(3, 2, 1);
  Counters c;
  CHECK_THROWS_AS(full_gradient(e, Vector::Zero(2), c), UnsupportedOperation);
  // The law is enumerable, so the exact gradient is still available.
  CHECK(exact_gradient(e, Vector::Zero(2)).size() == 2);
}
