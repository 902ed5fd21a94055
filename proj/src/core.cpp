#include "proxsarah/core.hpp"

#include "proxsarah/errors.hpp"

#include <bit>
#include <future>
#include <string>

namespace proxsarah {

std::size_t ProblemOracle::outcome_count() const {
  const OracleMode m = mode();
  return m.is_finite_sum() ? m.n : 0;
}

double ProblemOracle::outcome_probability(std::size_t k) const {
  const std::size_t count = outcome_count();
  if (k >= count) throw InvalidArgument("outcome index out of range");
  return 1.0 / static_cast<double>(count);
}

void ProblemOracle::add_outcome_gradient(const Vector& w, std::size_t k, double scale, Vector& out) const {
  if (!mode().is_finite_sum()) throw UnsupportedOperation("oracle does not enumerate its outcomes");
  add_component_gradient(w, static_cast<SampleId>(k), scale, out);
}

double ProblemOracle::outcome_value(const Vector& w, std::size_t k) const {
  if (!mode().is_finite_sum()) throw UnsupportedOperation("oracle does not enumerate its outcomes");
  return component_value(w, static_cast<SampleId>(k));
}

void check_sample(const ProblemOracle& oracle, SampleId i) {
  const OracleMode m = oracle.mode();
  if (m.is_finite_sum() && i >= m.n) {
    throw InvalidArgument("sample index " + std::to_string(i) + " out of range [0, " + std::to_string(m.n) + ")");
  }
}

namespace {

std::size_t split_point(std::size_t len) {
  // largest power of two strictly below len (len >= 2)
  return std::bit_floor(len - 1);
}

template <typename Acc, typename Leaf, typename Zero>
Acc tree_blocks(std::size_t lo, std::size_t hi, int threads, const Leaf& leaf, const Zero& zero) {
  if (hi - lo == 1) return leaf(lo);
  const std::size_t mid = lo + split_point(hi - lo);
  if (threads > 1) {
    const int left_threads = threads / 2;
    auto left = std::async(std::launch::async, [&] { return tree_blocks<Acc>(lo, mid, left_threads, leaf, zero); });
    Acc right = tree_blocks<Acc>(mid, hi, threads - left_threads, leaf, zero);
    Acc out = left.get();
    out += right;
    return out;
  }
  Acc out = tree_blocks<Acc>(lo, mid, 1, leaf, zero);
  out += tree_blocks<Acc>(mid, hi, 1, leaf, zero);
  return out;
}

}  // namespace

Vector pairwise_tree_sum(std::size_t count, std::size_t dim,
                         const std::function<void(std::size_t, Vector&)>& add_item, const Reduction& reduction) {
  const auto zero = [dim] { return Vector::Zero(static_cast<Eigen::Index>(dim)).eval(); };
  if (count == 0) return zero();
  const std::size_t blocks = (count + kReductionLeaf - 1) / kReductionLeaf;
  const auto leaf = [&](std::size_t b) {
    Vector acc = zero();
    const std::size_t end = std::min(count, (b + 1) * kReductionLeaf);
    for (std::size_t i = b * kReductionLeaf; i < end; ++i) add_item(i, acc);
    return acc;
  };
  return tree_blocks<Vector>(0, blocks, std::max(1, reduction.threads), leaf, zero);
}

double pairwise_tree_sum(std::size_t count, const std::function<double(std::size_t)>& item,
                         const Reduction& reduction) {
  if (count == 0) return 0.0;
  const std::size_t blocks = (count + kReductionLeaf - 1) / kReductionLeaf;
  const auto leaf = [&](std::size_t b) {
    double acc = 0.0;
    const std::size_t end = std::min(count, (b + 1) * kReductionLeaf);
    for (std::size_t i = b * kReductionLeaf; i < end; ++i) acc += item(i);
    return acc;
  };
  return tree_blocks<double>(0, blocks, std::max(1, reduction.threads), leaf, [] { return 0.0; });
}

Vector component_gradient(const ProblemOracle& oracle, const Vector& w, SampleId i, Counters& counters) {
  check_sample(oracle, i);
  Vector out = Vector::Zero(static_cast<Eigen::Index>(oracle.dimension()));
  oracle.add_component_gradient(w, i, 1.0, out);
  ++counters.sfo;
  return out;
}

Vector full_gradient(const ProblemOracle& oracle, const Vector& w, Counters& counters, const Reduction& reduction) {
  const OracleMode m = oracle.mode();
  if (!m.is_finite_sum()) throw UnsupportedOperation("full_gradient requires finite-sum mode; use a snapshot batch");
  Vector sum = pairwise_tree_sum(
      m.n, oracle.dimension(),
      [&](std::size_t i, Vector& acc) { oracle.add_component_gradient(w, static_cast<SampleId>(i), 1.0, acc); },
      reduction);
  counters.sfo += static_cast<std::int64_t>(m.n);
  return sum / static_cast<double>(m.n);
}

Vector batch_mean_gradient(const ProblemOracle& oracle, const Vector& w, std::span<const SampleId> ids,
                           Counters& counters) {
  if (ids.empty()) throw InvalidArgument("empty mini-batch");
  Vector out = Vector::Zero(static_cast<Eigen::Index>(oracle.dimension()));
  for (SampleId i : ids) {
    check_sample(oracle, i);
    oracle.add_component_gradient(w, i, 1.0, out);
  }
  counters.sfo += static_cast<std::int64_t>(ids.size());
  return out / static_cast<double>(ids.size());
}

Vector batch_mean_difference(const ProblemOracle& oracle, const Vector& w, const Vector& w_prev,
                             std::span<const SampleId> ids, Counters& counters) {
  if (ids.empty()) throw InvalidArgument("empty mini-batch");
  if (w.size() != w_prev.size()) throw InvalidArgument("dimension mismatch");
  Vector out = Vector::Zero(static_cast<Eigen::Index>(oracle.dimension()));
  for (SampleId i : ids) {
    check_sample(oracle, i);
    oracle.add_component_gradient(w, i, 1.0, out);
    oracle.add_component_gradient(w_prev, i, -1.0, out);
  }
  counters.sfo += 2 * static_cast<std::int64_t>(ids.size());
  return out / static_cast<double>(ids.size());
}

Vector exact_gradient(const ProblemOracle& oracle, const Vector& w, const Reduction& reduction) {
  if (oracle.mode().is_finite_sum()) {
    Counters scratch;
    return full_gradient(oracle, w, scratch, reduction);
  }
  const std::size_t count = oracle.outcome_count();
  if (count == 0) throw UnsupportedOperation("oracle has no exact gradient");
  return pairwise_tree_sum(
      count, oracle.dimension(),
      [&](std::size_t k, Vector& acc) { oracle.add_outcome_gradient(w, k, oracle.outcome_probability(k), acc); },
      reduction);
}

double exact_objective(const ProblemOracle& oracle, const Vector& w, const Reduction& reduction) {
  const std::size_t count = oracle.outcome_count();
  if (count == 0) throw UnsupportedOperation("oracle has no exact objective");
  if (oracle.mode().is_finite_sum()) {
    const double sum = pairwise_tree_sum(
        count, [&](std::size_t i) { return oracle.component_value(w, static_cast<SampleId>(i)); }, reduction);
    return sum / static_cast<double>(count);
  }
  return pairwise_tree_sum(
      count, [&](std::size_t k) { return oracle.outcome_probability(k) * oracle.outcome_value(w, k); }, reduction);
}

}  // namespace proxsarah
