#include "proxsarah/estimators.hpp"

#include "proxsarah/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_set>

namespace proxsarah {

MiniBatch sample_minibatch(RngStream& rng, std::size_t n, std::size_t b_hat) {
  if (b_hat < 1 || b_hat > n) {
    throw InvalidArgument("mini-batch size " + std::to_string(b_hat) + " outside [1, " + std::to_string(n) + "]");
  }
  MiniBatch batch;
  batch.ids.reserve(b_hat);
  std::unordered_set<SampleId> taken;
  taken.reserve(b_hat * 2);
  for (std::size_t j = n - b_hat; j < n; ++j) {
    const SampleId t = rng.uniform_below(j + 1);
    const SampleId pick = taken.contains(t) ? static_cast<SampleId>(j) : t;
    taken.insert(pick);
    batch.ids.push_back(pick);
  }
  std::sort(batch.ids.begin(), batch.ids.end());
  return batch;
}

MiniBatch draw_batch(const ProblemOracle& oracle, RngStream& rng, std::size_t size) {
  const OracleMode mode = oracle.mode();
  if (mode.is_finite_sum()) {
    if (size == mode.n) {
      MiniBatch all;
      all.ids.resize(size);
      std::iota(all.ids.begin(), all.ids.end(), SampleId{0});
      return all;
    }
    return sample_minibatch(rng, mode.n, size);
  }
  if (size < 1) throw InvalidArgument("mini-batch size must be >= 1");
  MiniBatch batch;
  batch.ids.reserve(size);
  for (std::size_t k = 0; k < size; ++k) batch.ids.push_back(rng.next_u64() & ~kValidationIdBit);
  return batch;
}

SarahState sarah_snapshot(const ProblemOracle& oracle, const Vector& w0, std::size_t b_s, RngStream& rng,
                          Counters& counters, const Reduction& reduction) {
  const OracleMode mode = oracle.mode();
  if (b_s < 1 || (mode.is_finite_sum() && b_s > mode.n)) {
    throw InvalidArgument("snapshot batch size " + std::to_string(b_s) + " out of range");
  }
  if (static_cast<std::size_t>(w0.size()) != oracle.dimension()) throw InvalidArgument("dimension mismatch");
  SarahState state;
  state.w_prev = w0;
  if (mode.is_finite_sum() && b_s == mode.n) {
    state.v = full_gradient(oracle, w0, counters, reduction);
  } else {
    const MiniBatch batch = draw_batch(oracle, rng, b_s);
    state.v = batch_mean_gradient(oracle, w0, batch.ids, counters);
  }
  return state;
}

SarahState sarah_update(SarahState state, const ProblemOracle& oracle, const Vector& w_t, const MiniBatch& batch,
                        Counters& counters) {
  if (w_t.size() != state.v.size() || w_t.size() != state.w_prev.size()) throw InvalidArgument("dimension mismatch");
  state.v += batch_mean_difference(oracle, w_t, state.w_prev, batch.ids, counters);
  state.w_prev = w_t;
  return state;
}

Vector svrg_estimator(const ProblemOracle& oracle, const Vector& w_t, const Vector& snapshot_w,
                      const Vector& snapshot_grad, const MiniBatch& batch, Counters& counters) {
  if (w_t.size() != snapshot_w.size() || w_t.size() != snapshot_grad.size()) {
    throw InvalidArgument("dimension mismatch");
  }
  return snapshot_grad + batch_mean_difference(oracle, w_t, snapshot_w, batch.ids, counters);
}

// ---------------------------------------------------------------------------

std::uint64_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t out = 1;
  for (std::size_t j = 1; j <= k; ++j) out = out * (n - k + j) / j;
  return out;
}

void for_each_subset(std::size_t n, std::size_t k, const std::function<void(std::span<const SampleId>)>& fn) {
  if (k > n) return;
  std::vector<SampleId> idx(k);
  std::iota(idx.begin(), idx.end(), SampleId{0});
  while (true) {
    fn(idx);
    // advance to the next combination in lexicographic order
    std::size_t pos = k;
    while (pos > 0 && idx[pos - 1] == n - k + pos - 1) --pos;
    if (pos == 0) return;
    ++idx[pos - 1];
    for (std::size_t j = pos; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

double VarianceComparison::residual() const { return std::abs(enumerated - closed_form); }

namespace {

std::size_t enumerable_n(const ProblemOracle& oracle) {
  const OracleMode mode = oracle.mode();
  if (!mode.is_finite_sum()) throw UnsupportedOperation("enumeration requires finite-sum mode");
  if (mode.n > kMaxEnumerationN) {
    throw EnumerationTooLarge("n = " + std::to_string(mode.n) + " exceeds the enumeration guard of " +
                              std::to_string(kMaxEnumerationN));
  }
  return mode.n;
}

std::vector<Vector> component_gradients(const ProblemOracle& oracle, const Vector& w, std::size_t n) {
  std::vector<Vector> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vector g = Vector::Zero(static_cast<Eigen::Index>(oracle.dimension()));
    oracle.add_component_gradient(w, static_cast<SampleId>(i), 1.0, g);
    out.push_back(std::move(g));
  }
  return out;
}

Vector mean_of(const std::vector<Vector>& terms, std::span<const SampleId> ids) {
  Vector out = Vector::Zero(terms.front().size());
  for (SampleId i : ids) out += terms[i];
  return out / static_cast<double>(ids.size());
}

Vector mean_all(const std::vector<Vector>& terms) {
  Vector out = Vector::Zero(terms.front().size());
  for (const Vector& t : terms) out += t;
  return out / static_cast<double>(terms.size());
}

void check_batch(std::size_t b, std::size_t n) {
  if (b < 1 || b > n) throw InvalidArgument("batch size " + std::to_string(b) + " outside [1, n]");
}

}  // namespace

VarianceComparison brute_force_variance(const ProblemOracle& oracle, const Vector& w_t, const Vector& w_prev,
                                        std::size_t b_hat) {
  const std::size_t n = enumerable_n(oracle);
  check_batch(b_hat, n);
  const auto g_now = component_gradients(oracle, w_t, n);
  const auto g_prev = component_gradients(oracle, w_prev, n);
  std::vector<Vector> diff(n);
  for (std::size_t i = 0; i < n; ++i) diff[i] = g_now[i] - g_prev[i];

  VarianceComparison out;
  const double subsets = static_cast<double>(binomial(n, b_hat));
  for_each_subset(n, b_hat, [&](std::span<const SampleId> ids) {
    out.enumerated += mean_of(diff, ids).squaredNorm() / subsets;
  });

  const double nd = static_cast<double>(n);
  const double bd = static_cast<double>(b_hat);
  double avg_sq = 0.0;
  for (const Vector& d : diff) avg_sq += d.squaredNorm();
  avg_sq /= nd;
  const double full_sq = mean_all(diff).squaredNorm();
  if (n == 1) {
    out.closed_form = full_sq;
  } else {
    out.closed_form = nd * (bd - 1.0) / (bd * (nd - 1.0)) * full_sq + (nd - bd) / (bd * (nd - 1.0)) * avg_sq;
  }
  return out;
}

VarianceComparison snapshot_variance(const ProblemOracle& oracle, const Vector& w, std::size_t b) {
  const std::size_t n = enumerable_n(oracle);
  check_batch(b, n);
  const auto grads = component_gradients(oracle, w, n);
  const Vector full = mean_all(grads);

  VarianceComparison out;
  const double subsets = static_cast<double>(binomial(n, b));
  for_each_subset(n, b, [&](std::span<const SampleId> ids) {
    out.enumerated += (mean_of(grads, ids) - full).squaredNorm() / subsets;
  });
  double sigma_sq = 0.0;
  for (const Vector& g : grads) sigma_sq += g.squaredNorm() - full.squaredNorm();
  sigma_sq /= static_cast<double>(n);
  out.closed_form = n == 1 ? 0.0
                           : (1.0 / static_cast<double>(b)) * (static_cast<double>(n - b) / static_cast<double>(n - 1)) *
                                 sigma_sq;
  return out;
}

BiasCheck sarah_bias_enumeration(const ProblemOracle& oracle, const Vector& w0, const Vector& w1, std::size_t b_s,
                                 std::size_t b_hat) {
  const std::size_t n = enumerable_n(oracle);
  check_batch(b_s, n);
  check_batch(b_hat, n);
  const auto g0 = component_gradients(oracle, w0, n);
  const auto g1 = component_gradients(oracle, w1, n);
  const Vector full0 = mean_all(g0);
  const Vector full1 = mean_all(g1);
  std::vector<Vector> diff(n);
  for (std::size_t i = 0; i < n; ++i) diff[i] = g1[i] - g0[i];

  BiasCheck out;
  Vector v0_mean = Vector::Zero(full0.size());
  const double outer_count = static_cast<double>(binomial(n, b_s));
  const double inner_count = static_cast<double>(binomial(n, b_hat));
  for_each_subset(n, b_s, [&](std::span<const SampleId> snapshot_ids) {
    const Vector v0 = mean_of(g0, snapshot_ids);
    v0_mean += v0 / outer_count;
    Vector expected_v1 = Vector::Zero(v0.size());
    for_each_subset(n, b_hat, [&](std::span<const SampleId> ids) {
      expected_v1 += (v0 + mean_of(diff, ids)) / inner_count;
    });
    const double r = ((expected_v1 - full1) - (v0 - full0)).lpNorm<Eigen::Infinity>();
    out.bias_residual = std::max(out.bias_residual, r);
  });
  out.unbiasedness_residual = (v0_mean - full0).lpNorm<Eigen::Infinity>();
  return out;
}

VarianceComparison sarah_telescoping_enumeration(const ProblemOracle& oracle, std::span<const Vector> path,
                                                 std::size_t b_s, std::size_t b_hat) {
  const std::size_t n = enumerable_n(oracle);
  check_batch(b_s, n);
  check_batch(b_hat, n);
  if (path.size() < 2) throw InvalidArgument("path needs at least two points");
  const std::size_t steps = path.size() - 1;

  std::vector<std::vector<Vector>> grads;
  std::vector<Vector> fulls;
  for (const Vector& w : path) {
    grads.push_back(component_gradients(oracle, w, n));
    fulls.push_back(mean_all(grads.back()));
  }
  std::vector<std::vector<Vector>> diffs(steps, std::vector<Vector>(n));
  for (std::size_t j = 0; j < steps; ++j) {
    for (std::size_t i = 0; i < n; ++i) diffs[j][i] = grads[j + 1][i] - grads[j][i];
  }

  // Expectations accumulated over the product of all batch choices.
  double lhs = 0.0;
  double snapshot_term = 0.0;
  std::vector<double> increment_terms(steps, 0.0);
  const double snapshot_count = static_cast<double>(binomial(n, b_s));
  const double inner_count = static_cast<double>(binomial(n, b_hat));

  std::function<void(std::size_t, const Vector&, double)> descend = [&](std::size_t j, const Vector& v, double prob) {
    if (j == steps) {
      lhs += prob * (v - fulls[steps]).squaredNorm();
      return;
    }
    for_each_subset(n, b_hat, [&](std::span<const SampleId> ids) {
      const Vector increment = mean_of(diffs[j], ids);
      const double p = prob / inner_count;
      increment_terms[j] += p * increment.squaredNorm();
      descend(j + 1, v + increment, p);
    });
  };
  for_each_subset(n, b_s, [&](std::span<const SampleId> ids) {
    const Vector v0 = mean_of(grads[0], ids);
    snapshot_term += (v0 - fulls[0]).squaredNorm() / snapshot_count;
    descend(0, v0, 1.0 / snapshot_count);
  });

  VarianceComparison out;
  out.enumerated = lhs;
  out.closed_form = snapshot_term;
  for (std::size_t j = 0; j < steps; ++j) {
    out.closed_form += increment_terms[j] - (fulls[j + 1] - fulls[j]).squaredNorm();
  }
  return out;
}

VarianceComparison expectation_increment_variance(const ProblemOracle& oracle, const Vector& w_t,
                                                  const Vector& w_prev, std::size_t b) {
  const std::size_t k = oracle.outcome_count();
  if (k == 0) throw UnsupportedOperation("oracle does not enumerate its outcomes");
  if (b < 1) throw InvalidArgument("batch size must be >= 1");
  const double tuples = std::pow(static_cast<double>(k), static_cast<double>(b));
  if (tuples > 1e6) throw EnumerationTooLarge("outcome tuples exceed 1e6");

  std::vector<Vector> diff(k);
  std::vector<double> prob(k);
  Vector mean_diff = Vector::Zero(static_cast<Eigen::Index>(oracle.dimension()));
  double second_moment = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    diff[j] = Vector::Zero(static_cast<Eigen::Index>(oracle.dimension()));
    oracle.add_outcome_gradient(w_t, j, 1.0, diff[j]);
    oracle.add_outcome_gradient(w_prev, j, -1.0, diff[j]);
    prob[j] = oracle.outcome_probability(j);
    mean_diff += prob[j] * diff[j];
    second_moment += prob[j] * diff[j].squaredNorm();
  }

  VarianceComparison out;
  std::vector<std::size_t> tuple(b, 0);
  while (true) {
    Vector avg = Vector::Zero(mean_diff.size());
    double p = 1.0;
    for (std::size_t j : tuple) {
      avg += diff[j];
      p *= prob[j];
    }
    avg /= static_cast<double>(b);
    out.enumerated += p * avg.squaredNorm();
    std::size_t pos = 0;
    while (pos < b && ++tuple[pos] == k) tuple[pos++] = 0;
    if (pos == b) break;
  }
  const double bd = static_cast<double>(b);
  out.closed_form = (1.0 - 1.0 / bd) * mean_diff.squaredNorm() + second_moment / bd;
  return out;
}

}  // namespace proxsarah
