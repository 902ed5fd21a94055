#include <doctest.h>

#include "proxsarah/errors.hpp"
#include "proxsarah/estimators.hpp"
#include "proxsarah/problems.hpp"
#include "proxsarah/verify.hpp"

#include <map>
#include <vector>

using namespace proxsarah;

TEST_CASE("binomial coefficients") {
  CHECK(binomial(5, 2) == 10);
  CHECK(binomial(6, 0) == 1);
  CHECK(binomial(12, 6) == 924);
  CHECK(binomial(3, 4) == 0);
}

TEST_CASE("subset enumeration order") {
  std::vector<std::vector<SampleId>> seen;
  for_each_subset(4, 2, [&](std::span<const SampleId> s) { seen.emplace_back(s.begin(), s.end()); });
  REQUIRE(seen.size() == 6);
  CHECK(seen.front() == std::vector<SampleId>{0, 1});
  CHECK(seen.back() == std::vector<SampleId>{2, 3});
}

TEST_CASE("minibatch draws are sorted, distinct and in range") {
  RngStream r(3, 1);
  for (int k = 0; k < 200; ++k) {
    const MiniBatch b = sample_minibatch(r, 20, 7);
    REQUIRE(b.size() == 7);
    for (std::size_t j = 1; j < b.size(); ++j) CHECK(b.ids[j - 1] < b.ids[j]);
    CHECK(b.ids.back() < 20);
  }
  CHECK_THROWS_AS(sample_minibatch(r, 5, 0), InvalidArgument);
  CHECK_THROWS_AS(sample_minibatch(r, 5, 6), InvalidArgument);
}

TEST_CASE("minibatch subsets are uniform (chi-square, n=4, b=2)") {
  RngStream r(2024, 1);
  std::map<std::vector<SampleId>, std::size_t> counts;
  const std::size_t draws = 60000;
  for (std::size_t k = 0; k < draws; ++k) ++counts[sample_minibatch(r, 4, 2).ids];
  REQUIRE(counts.size() == 6);
  std::vector<std::size_t> observed;
  for (const auto& [ids, c] : counts) observed.push_back(c);
  const double stat = chi_square_statistic(observed, std::vector<double>(6, 1.0 / 6.0));
  CHECK(stat < chi_square_critical(5, 0.001));
}

TEST_CASE("draw_batch covers everything when size equals n") {
  const QuadraticSum q = QuadraticSum::random(6, 2, 1);
  RngStream r(1, 1);
  const MiniBatch b = draw_batch(q, r, 6);
  CHECK(b.ids == std::vector<SampleId>{0, 1, 2, 3, 4, 5});
}

TEST_CASE("expectation ids keep the validation bit clear") {
  const SyntheticExpectation e = SyntheticExpectation::random(4, 2, 9);
  RngStream r(1, 1);
  const MiniBatch b = draw_batch(e, r, 50);
  for (SampleId id : b.ids) CHECK((id & kValidationIdBit) == 0);
}

TEST_CASE("full snapshot gives the exact gradient and b_hat = n keeps it exact") {
  const QuadraticSum q = QuadraticSum::random(5, 3, 4);
  RngStream r(1, 1);
  Counters c;
  const Vector w0 = Vector::Constant(3, 0.2);
  SarahState st = sarah_snapshot(q, w0, 5, r, c);
  CHECK((st.v - exact_gradient(q, w0)).norm() == 0.0);
  CHECK(c.sfo == 5);
  const Vector w1 = Vector::Constant(3, -0.4);
  MiniBatch all;
  all.ids = {0, 1, 2, 3, 4};
  st = sarah_update(st, q, w1, all, c);
  CHECK((st.v - exact_gradient(q, w1)).norm() < 1e-15);
  CHECK(c.sfo == 15);
  CHECK(st.w_prev == w1);
}

TEST_CASE("SVRG estimator at the snapshot equals the snapshot gradient") {
  const QuadraticSum q = QuadraticSum::random(5, 2, 8);
  Counters c;
  const Vector w = Vector::Constant(2, 0.7);
  const Vector g = exact_gradient(q, w);
  MiniBatch b;
  b.ids = {1, 3};
  CHECK((svrg_estimator(q, w, w, g, b, c) - g).norm() < 1e-15);
  CHECK(c.sfo == 4);
}

TEST_CASE("increment variance closed form matches enumeration") {
  const QuadraticSum q = QuadraticSum::random(5, 3, 17);
  const Vector a = Vector::Constant(3, 0.5);
  const Vector b = Vector::LinSpaced(3, -1.0, 0.3);
  for (std::size_t bh = 1; bh <= 5; ++bh) CHECK(brute_force_variance(q, a, b, bh).residual() < 1e-12);
  const double full = (exact_gradient(q, a) - exact_gradient(q, b)).squaredNorm();
  CHECK(brute_force_variance(q, a, b, 5).enumerated == doctest::Approx(full).epsilon(1e-13));
  CHECK(snapshot_variance(q, a, 2).residual() < 1e-12);
}

TEST_CASE("enumeration guard") {
  const QuadraticSum big = QuadraticSum::random(13, 1, 1);
  const Vector w = Vector::Zero(1);
  CHECK_THROWS_AS(brute_force_variance(big, w, w, 2), EnumerationTooLarge);
}
