#pragma once

#include "proxsarah/core.hpp"
#include "proxsarah/data.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace proxsarah {

/// f(w) = -(1/2n) sum_i (z_i^T w)^2 over unit-norm rows, so L = 1.
class NnPcaProblem final : public ProblemOracle {
 public:
  /// Throws InvalidArgument unless every row has unit norm within 1e-12.
  explicit NnPcaProblem(Dataset data);

  OracleMode mode() const override { return OracleMode::finite_sum(data_.size()); }
  std::size_t dimension() const override { return data_.dimension(); }
  double lipschitz() const override { return 1.0; }
  void add_component_gradient(const Vector& w, SampleId i, double scale, Vector& out) const override;
  double component_value(const Vector& w, SampleId i) const override;

  const Dataset& data() const { return data_; }

 private:
  Dataset data_;
};

/// Smooth nonconvex losses l(s, tau) of a margin s and label tau in {-1, +1}.
class Loss {
 public:
  enum class Kind {
    kSigmoid,             // 1 - tanh(omega tau s)
    kTwoLayer,            // (1 - 1/(1 + exp(-tau s)))^2
    kLogisticDifference,  // ln(1 + e^{-tau s}) - ln(1 + e^{-tau s - omega})
  };

  explicit Loss(Kind kind, double omega = 1.0);

  Kind kind() const { return kind_; }
  double omega() const { return omega_; }
  std::string name() const;

  double value(double s, double tau) const;
  double derivative(double s, double tau) const;
  double second_derivative(double s, double tau) const;
  /// Bound on |l''|: 4 sqrt(3)/9 omega^2, 0.15405, and 0.092372 (omega = 1;
  /// other omega by numerical maximization of |l''|).
  double smoothness() const { return smoothness_; }

  static Kind parse_kind(const std::string& name);

 private:
  Kind kind_;
  double omega_;
  double smoothness_;
};

/// f_i(w) = l(a_i^T w, b_i). The l1 term is the regularizer, not part of f.
/// L = loss smoothness * max_i ||a_i||^2.
class BinClassProblem final : public ProblemOracle {
 public:
  /// Labels must already be in {-1, +1}.
  BinClassProblem(Dataset data, Loss loss);

  OracleMode mode() const override { return OracleMode::finite_sum(data_.size()); }
  std::size_t dimension() const override { return data_.dimension(); }
  double lipschitz() const override { return lipschitz_; }
  void add_component_gradient(const Vector& w, SampleId i, double scale, Vector& out) const override;
  double component_value(const Vector& w, SampleId i) const override;

  const Dataset& data() const { return data_; }
  const Loss& loss() const { return loss_; }

 private:
  Dataset data_;
  Loss loss_;
  double lipschitz_;
};

/// f_i(w) = sum_k (h_ik w_k^2 / 2 + g_ik w_k): separable quadratics with
/// possibly negative curvature. L = sqrt(max_k mean_i h_ik^2), the tight
/// average-smoothness constant.
class QuadraticSum final : public ProblemOracle {
 public:
  QuadraticSum(std::vector<Vector> curvature, std::vector<Vector> linear);

  /// Random instance with curvature in [lo, hi] and linear terms in [-1, 1].
  static QuadraticSum random(std::size_t n, std::size_t d, std::uint64_t seed, double lo = -1.0, double hi = 1.0);

  OracleMode mode() const override { return OracleMode::finite_sum(curvature_.size()); }
  std::size_t dimension() const override { return static_cast<std::size_t>(curvature_.front().size()); }
  double lipschitz() const override { return lipschitz_; }
  void add_component_gradient(const Vector& w, SampleId i, double scale, Vector& out) const override;
  double component_value(const Vector& w, SampleId i) const override;

 private:
  std::vector<Vector> curvature_;
  std::vector<Vector> linear_;
  double lipschitz_;
};

/// Expectation-mode oracle with finitely many latent outcomes, each a
/// separable quadratic. Sample id k maps to an outcome by inverse CDF of a
/// hash of (seed, k). The variance bound sigma^2 is the exact maximum of the
/// outcome variance over the box ||w||_inf <= radius.
class SyntheticExpectation final : public ProblemOracle {
 public:
  SyntheticExpectation(std::vector<Vector> curvature, std::vector<Vector> linear, std::vector<double> probabilities,
                       std::uint64_t seed, double radius = 1.0);

  static SyntheticExpectation random(std::size_t outcomes, std::size_t d, std::uint64_t seed, double radius = 1.0);

  OracleMode mode() const override { return OracleMode::expectation(); }
  std::size_t dimension() const override { return static_cast<std::size_t>(curvature_.front().size()); }
  double lipschitz() const override { return lipschitz_; }
  void add_component_gradient(const Vector& w, SampleId i, double scale, Vector& out) const override;
  double component_value(const Vector& w, SampleId i) const override;

  std::size_t outcome_count() const override { return curvature_.size(); }
  double outcome_probability(std::size_t k) const override;
  void add_outcome_gradient(const Vector& w, std::size_t k, double scale, Vector& out) const override;
  double outcome_value(const Vector& w, std::size_t k) const override;

  /// Outcome drawn for sample id i.
  std::size_t outcome_of(SampleId i) const;
  /// E||grad f(w; xi) - grad f(w)||^2 at w.
  double variance_at(const Vector& w) const;
  double sigma_squared() const { return sigma_sq_; }
  double radius() const { return radius_; }

 private:
  std::vector<Vector> curvature_;
  std::vector<Vector> linear_;
  std::vector<double> probabilities_;
  std::vector<double> cumulative_;
  std::uint64_t seed_;
  double radius_;
  double lipschitz_;
  double sigma_sq_;
};

/// Expectation view of a finite-sum problem: each draw picks a component
/// uniformly at random (with replacement).
class ExpectationView final : public ProblemOracle {
 public:
  ExpectationView(std::shared_ptr<const ProblemOracle> base, std::uint64_t seed);

  OracleMode mode() const override { return OracleMode::expectation(); }
  std::size_t dimension() const override { return base_->dimension(); }
  double lipschitz() const override { return base_->lipschitz(); }
  void add_component_gradient(const Vector& w, SampleId i, double scale, Vector& out) const override;
  double component_value(const Vector& w, SampleId i) const override;

  std::size_t outcome_count() const override { return base_->mode().n; }
  double outcome_probability(std::size_t k) const override;
  void add_outcome_gradient(const Vector& w, std::size_t k, double scale, Vector& out) const override;
  double outcome_value(const Vector& w, std::size_t k) const override;

  std::size_t component_of(SampleId i) const;

 private:
  std::shared_ptr<const ProblemOracle> base_;
  std::uint64_t seed_;
};

/// Fraction of rows with sign(a_i^T w) == b_i, where sign(0) = +1.
double accuracy(const Vector& w, const Dataset& samples);

/// max over random pairs (w, w') of (1/n) sum_i ||grad f_i(w) - grad f_i(w')||^2 / ||w - w'||^2.
/// Half the pairs are far apart, half are local perturbations.
double empirical_smoothness_check(const ProblemOracle& problem, std::size_t trials, std::uint64_t seed = 1);

}  // namespace proxsarah
