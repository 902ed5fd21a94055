#pragma once

#include "proxsarah/prox.hpp"
#include "proxsarah/types.hpp"

#include <cstddef>
#include <functional>
#include <span>

namespace proxsarah {

/// How f is accessed: average of n components, or expectation over a sampler.
struct OracleMode {
  enum class Kind { kFiniteSum, kExpectation };

  Kind kind = Kind::kFiniteSum;
  std::size_t n = 0;  // number of components; 0 in expectation mode

  static OracleMode finite_sum(std::size_t n) { return {Kind::kFiniteSum, n}; }
  static OracleMode expectation() { return {Kind::kExpectation, 0}; }

  bool is_finite_sum() const { return kind == Kind::kFiniteSum; }
};

/// Read-only view of the smooth part f. Implementations must be safe for
/// concurrent const use; work counters live with the caller.
///
/// Exact expectations are exposed through a finite list of weighted
/// "outcomes". In finite-sum mode the outcomes are the n components with
/// weight 1/n. Expectation-mode oracles that cannot enumerate their law
/// report outcome_count() == 0.
class ProblemOracle {
 public:
  virtual ~ProblemOracle() = default;

  virtual OracleMode mode() const = 0;
  virtual std::size_t dimension() const = 0;
  /// Average-smoothness constant L.
  virtual double lipschitz() const = 0;

  /// out += scale * grad f(w; sample i). `i` has already been validated.
  virtual void add_component_gradient(const Vector& w, SampleId i, double scale, Vector& out) const = 0;
  virtual double component_value(const Vector& w, SampleId i) const = 0;

  virtual std::size_t outcome_count() const;
  virtual double outcome_probability(std::size_t k) const;
  virtual void add_outcome_gradient(const Vector& w, std::size_t k, double scale, Vector& out) const;
  virtual double outcome_value(const Vector& w, std::size_t k) const;
};

/// Throws InvalidArgument if `i` is not a valid sample id for the oracle.
void check_sample(const ProblemOracle& oracle, SampleId i);

/// Worker count for snapshot reductions. Results never depend on it.
struct Reduction {
  int threads = 1;
};

/// Items per sequential leaf of the pairwise reduction tree.
inline constexpr std::size_t kReductionLeaf = 32;

/// Sums `count` items with a fixed-shape tree: leaves of kReductionLeaf
/// consecutive items accumulated in index order, then blocks combined pairwise,
/// splitting each range at the largest power of two below its length. The
/// shape depends only on `count`, so the result is bit-identical for any
/// thread count.
Vector pairwise_tree_sum(std::size_t count, std::size_t dim,
                         const std::function<void(std::size_t, Vector&)>& add_item,
                         const Reduction& reduction = {});

double pairwise_tree_sum(std::size_t count, const std::function<double(std::size_t)>& item,
                         const Reduction& reduction = {});

/// grad f_i(w); counts one SFO call.
Vector component_gradient(const ProblemOracle& oracle, const Vector& w, SampleId i, Counters& counters);

/// (1/n) sum_i grad f_i(w) via pairwise_tree_sum; counts n SFO calls.
/// Throws UnsupportedOperation in expectation mode.
Vector full_gradient(const ProblemOracle& oracle, const Vector& w, Counters& counters,
                     const Reduction& reduction = {});

/// (1/|ids|) sum_{i in ids} grad f_i(w); counts |ids|.
Vector batch_mean_gradient(const ProblemOracle& oracle, const Vector& w, std::span<const SampleId> ids,
                           Counters& counters);

/// (1/|ids|) sum_{i in ids} (grad f_i(w) - grad f_i(w_prev)); counts 2|ids|.
Vector batch_mean_difference(const ProblemOracle& oracle, const Vector& w, const Vector& w_prev,
                             std::span<const SampleId> ids, Counters& counters);

/// Exact grad f(w) from the outcome list, uncounted (metrics and verification).
Vector exact_gradient(const ProblemOracle& oracle, const Vector& w, const Reduction& reduction = {});

/// Exact f(w) from the outcome list.
double exact_objective(const ProblemOracle& oracle, const Vector& w, const Reduction& reduction = {});

}  // namespace proxsarah
