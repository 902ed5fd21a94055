#pragma once

#include "proxsarah/core.hpp"
#include "proxsarah/rng.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace proxsarah {

struct MiniBatch {
  std::vector<SampleId> ids;

  std::size_t size() const { return ids.size(); }
};

/// b_hat distinct indices from [0, n), uniform over all subsets of that size.
/// Floyd's algorithm: for j = n-b_hat .. n-1 draw t = uniform_below(j+1) and
/// take t, or j if t was already taken. Returned in ascending order.
MiniBatch sample_minibatch(RngStream& rng, std::size_t n, std::size_t b_hat);

/// Expectation-mode ids are fresh 64-bit draws with the top bit clear; ids with
/// the top bit set are reserved for held-out validation samples.
inline constexpr SampleId kValidationIdBit = SampleId{1} << 63;

/// A batch that respects the oracle mode: distinct uniform indices in
/// finite-sum mode (all of [0, n) in order when size == n), i.i.d. draws in
/// expectation mode.
MiniBatch draw_batch(const ProblemOracle& oracle, RngStream& rng, std::size_t size);

/// SARAH recursion state: current estimator and the point it was last updated at.
struct SarahState {
  Vector v;
  Vector w_prev;
};

/// v = mean gradient at w0 over a snapshot batch of size b_s (exact full
/// gradient when b_s == n in finite-sum mode).
SarahState sarah_snapshot(const ProblemOracle& oracle, const Vector& w0, std::size_t b_s, RngStream& rng,
                          Counters& counters, const Reduction& reduction = {});

/// v += mean_{i in batch}(grad f_i(w_t) - grad f_i(w_prev)); w_prev = w_t.
SarahState sarah_update(SarahState state, const ProblemOracle& oracle, const Vector& w_t, const MiniBatch& batch,
                        Counters& counters);

/// snapshot_grad + mean_{i in batch}(grad f_i(w_t) - grad f_i(snapshot_w)).
Vector svrg_estimator(const ProblemOracle& oracle, const Vector& w_t, const Vector& snapshot_w,
                      const Vector& snapshot_grad, const MiniBatch& batch, Counters& counters);

// ---------------------------------------------------------------------------
// Exact expectations by enumeration. All of these take finite-sum oracles with
// n <= kMaxEnumerationN and do not touch any counters.

inline constexpr std::size_t kMaxEnumerationN = 12;

std::uint64_t binomial(std::size_t n, std::size_t k);

/// Calls fn on every size-k subset of [0, n) in lexicographic order.
void for_each_subset(std::size_t n, std::size_t k, const std::function<void(std::span<const SampleId>)>& fn);

struct VarianceComparison {
  double enumerated = 0.0;
  double closed_form = 0.0;

  double residual() const;
};

/// E||v_t - v_{t-1}||^2 over all size-b_hat batches against
///   n(b-1)/(b(n-1)) ||grad f(w_t) - grad f(w_prev)||^2
///   + (n-b)/(b(n-1)) (1/n) sum_i ||grad f_i(w_t) - grad f_i(w_prev)||^2.
VarianceComparison brute_force_variance(const ProblemOracle& oracle, const Vector& w_t, const Vector& w_prev,
                                        std::size_t b_hat);

/// E||v_0 - grad f(w)||^2 over all size-b snapshot batches against
/// (1/b)((n-b)/(n-1)) sigma_n^2, sigma_n^2 = (1/n) sum_i (||grad f_i||^2 - ||grad f||^2).
VarianceComparison snapshot_variance(const ProblemOracle& oracle, const Vector& w, std::size_t b);

/// max over snapshot batches of ||E[v_1 | F_1] - grad f(w_1) - (v_0 - grad f(w_0))||_inf
/// together with the largest deviation of the snapshot mean from grad f(w_0).
struct BiasCheck {
  double bias_residual = 0.0;       // SARAH bias identity
  double unbiasedness_residual = 0.0;  // mean of v_0 over snapshot batches vs grad f(w_0)
};
BiasCheck sarah_bias_enumeration(const ProblemOracle& oracle, const Vector& w0, const Vector& w1, std::size_t b_s,
                                 std::size_t b_hat);

/// Enumerates every batch sequence along the frozen path w_0..w_t and compares
/// E||v_t - grad f(w_t)||^2 with E||v_0 - grad f(w_0)||^2 + sum_j E||v_j - v_{j-1}||^2
/// - sum_j ||grad f(w_j) - grad f(w_{j-1})||^2.
VarianceComparison sarah_telescoping_enumeration(const ProblemOracle& oracle, std::span<const Vector> path,
                                                 std::size_t b_s, std::size_t b_hat);

/// Expectation-mode counterpart of brute_force_variance for an oracle with an
/// enumerable law: enumerates all ordered b-tuples of i.i.d. outcomes and compares with
///   (1 - 1/b)||grad f(w_t) - grad f(w_prev)||^2 + (1/b) E||grad f(w_t;xi) - grad f(w_prev;xi)||^2.
VarianceComparison expectation_increment_variance(const ProblemOracle& oracle, const Vector& w_t,
                                                  const Vector& w_prev, std::size_t b);

}  // namespace proxsarah
