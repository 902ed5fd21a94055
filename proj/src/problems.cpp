#include "proxsarah/problems.hpp"

#include "proxsarah/errors.hpp"
#include "proxsarah/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace proxsarah {

// ---------------------------------------------------------------------------
// NN-PCA

NnPcaProblem::NnPcaProblem(Dataset data) : data_(std::move(data)) {
  if (data_.empty()) throw InvalidArgument("NN-PCA needs at least one sample");
  if (!data_.rows_unit_norm(1e-12)) throw InvalidArgument("NN-PCA samples must be normalized to unit norm");
}

void NnPcaProblem::add_component_gradient(const Vector& w, SampleId i, double scale, Vector& out) const {
  const SparseRow z = data_.row(i);
  z.axpy(-scale * z.dot(w), out);
}

double NnPcaProblem::component_value(const Vector& w, SampleId i) const {
  const double s = data_.row(i).dot(w);
  return -0.5 * s * s;
}

// ---------------------------------------------------------------------------
// Losses

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + e^x) without overflow
double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid_slope(double x) { return sigmoid(x) * sigmoid(-x); }

double logistic_difference_curvature(double s, double omega) {
  const double x = -s;
  return sigmoid_slope(x) - sigmoid_slope(x - omega);
}

double max_abs_logistic_difference_curvature(double omega) {
  // Coarse grid, then a golden-section refinement around the best grid point.
  const double span = 40.0 + omega;
  const double step = 1e-3;
  double best_s = 0.0;
  double best = 0.0;
  for (double s = -span; s <= span; s += step) {
    const double v = std::abs(logistic_difference_curvature(s, omega));
    if (v > best) {
      best = v;
      best_s = s;
    }
  }
  double lo = best_s - step;
  double hi = best_s + step;
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 80; ++it) {
    const double a = hi - ratio * (hi - lo);
    const double b = lo + ratio * (hi - lo);
    if (std::abs(logistic_difference_curvature(a, omega)) > std::abs(logistic_difference_curvature(b, omega))) {
      hi = b;
    } else {
      lo = a;
    }
  }
  return std::max(best, std::abs(logistic_difference_curvature(0.5 * (lo + hi), omega)));
}

}  // namespace

Loss::Loss(Kind kind, double omega) : kind_(kind), omega_(omega) {
  if (!(omega > 0.0) || !std::isfinite(omega)) throw InvalidArgument("loss parameter omega must be > 0");
  switch (kind_) {
    case Kind::kSigmoid:
      smoothness_ = 4.0 * std::sqrt(3.0) / 9.0 * omega * omega;
      break;
    case Kind::kTwoLayer:
      smoothness_ = 0.15405;
      break;
    case Kind::kLogisticDifference:
      smoothness_ = omega == 1.0 ? 0.092372 : max_abs_logistic_difference_curvature(omega);
      break;
  }
}

std::string Loss::name() const {
  switch (kind_) {
    case Kind::kSigmoid:
      return "sigmoid";
    case Kind::kTwoLayer:
      return "two-layer";
    case Kind::kLogisticDifference:
      return "logistic-difference";
  }
  return "unknown";
}

Loss::Kind Loss::parse_kind(const std::string& name) {
  if (name == "sigmoid" || name == "l1") return Kind::kSigmoid;
  if (name == "two-layer" || name == "l2") return Kind::kTwoLayer;
  if (name == "logistic-difference" || name == "l3") return Kind::kLogisticDifference;
  throw InvalidArgument("unknown loss '" + name + "' (expected sigmoid, two-layer or logistic-difference)");
}

double Loss::value(double s, double tau) const {
  switch (kind_) {
    case Kind::kSigmoid:
      return 1.0 - std::tanh(omega_ * tau * s);
    case Kind::kTwoLayer: {
      const double q = sigmoid(-tau * s);
      return q * q;
    }
    case Kind::kLogisticDifference:
      return softplus(-tau * s) - softplus(-tau * s - omega_);
  }
  return 0.0;
}

double Loss::derivative(double s, double tau) const {
  switch (kind_) {
    case Kind::kSigmoid: {
      const double th = std::tanh(omega_ * tau * s);
      return -omega_ * tau * (1.0 - th * th);
    }
    case Kind::kTwoLayer: {
      const double q = sigmoid(-tau * s);
      return -2.0 * tau * q * q * sigmoid(tau * s);
    }
    case Kind::kLogisticDifference:
      return tau * (sigmoid(-tau * s - omega_) - sigmoid(-tau * s));
  }
  return 0.0;
}

double Loss::second_derivative(double s, double tau) const {
  switch (kind_) {
    case Kind::kSigmoid: {
      const double th = std::tanh(omega_ * tau * s);
      return 2.0 * omega_ * omega_ * tau * tau * th * (1.0 - th * th);
    }
    case Kind::kTwoLayer: {
      const double u = -tau * s;
      const double q = sigmoid(u);
      return 2.0 * tau * tau * q * q * sigmoid(-u) * (2.0 * sigmoid(-u) - q);
    }
    case Kind::kLogisticDifference: {
      const double x = -tau * s;
      return tau * tau * (sigmoid_slope(x) - sigmoid_slope(x - omega_));
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Binary classification

BinClassProblem::BinClassProblem(Dataset data, Loss loss) : data_(std::move(data)), loss_(loss) {
  if (data_.empty()) throw InvalidArgument("classification needs at least one sample");
  double max_sq = 0.0;
  for (std::size_t i = 0; i < data_.size(); ++i) {
    const SparseRow r = data_.row(i);
    if (r.label != 1.0 && r.label != -1.0) throw InvalidArgument("classification labels must be -1 or +1");
    max_sq = std::max(max_sq, r.squared_norm());
  }
  lipschitz_ = loss_.smoothness() * std::max(max_sq, 1e-300);
}

void BinClassProblem::add_component_gradient(const Vector& w, SampleId i, double scale, Vector& out) const {
  const SparseRow a = data_.row(i);
  a.axpy(scale * loss_.derivative(a.dot(w), a.label), out);
}

double BinClassProblem::component_value(const Vector& w, SampleId i) const {
  const SparseRow a = data_.row(i);
  return loss_.value(a.dot(w), a.label);
}

double accuracy(const Vector& w, const Dataset& samples) {
  if (samples.empty()) throw InvalidArgument("accuracy of an empty sample set");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const SparseRow a = samples.row(i);
    const double predicted = a.dot(w) >= 0.0 ? 1.0 : -1.0;
    if (predicted == a.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(samples.size());
}

// ---------------------------------------------------------------------------
// Quadratic toys

namespace {

double mean_square_curvature_bound(const std::vector<Vector>& curvature, const std::vector<double>& weights) {
  const Eigen::Index d = curvature.front().size();
  double worst = 0.0;
  for (Eigen::Index k = 0; k < d; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < curvature.size(); ++i) acc += weights[i] * curvature[i][k] * curvature[i][k];
    worst = std::max(worst, acc);
  }
  return std::sqrt(worst);
}

void check_quadratic_shapes(const std::vector<Vector>& curvature, const std::vector<Vector>& linear) {
  if (curvature.empty() || curvature.size() != linear.size()) {
    throw InvalidArgument("quadratic components need matching, nonempty curvature and linear terms");
  }
  const Eigen::Index d = curvature.front().size();
  for (std::size_t i = 0; i < curvature.size(); ++i) {
    if (curvature[i].size() != d || linear[i].size() != d) throw InvalidArgument("quadratic components differ in size");
  }
}

Vector uniform_vector(RngStream& rng, std::size_t d, double lo, double hi) {
  Vector v(static_cast<Eigen::Index>(d));
  for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = lo + (hi - lo) * rng.uniform01();
  return v;
}

}  // namespace

QuadraticSum::QuadraticSum(std::vector<Vector> curvature, std::vector<Vector> linear)
    : curvature_(std::move(curvature)), linear_(std::move(linear)) {
  check_quadratic_shapes(curvature_, linear_);
  const std::vector<double> weights(curvature_.size(), 1.0 / static_cast<double>(curvature_.size()));
  lipschitz_ = std::max(mean_square_curvature_bound(curvature_, weights), 1e-12);
}

QuadraticSum QuadraticSum::random(std::size_t n, std::size_t d, std::uint64_t seed, double lo, double hi) {
  RngStream rng(seed, stream_id(4, StreamPurpose::kSynthetic));
  std::vector<Vector> h;
  std::vector<Vector> g;
  for (std::size_t i = 0; i < n; ++i) {
    h.push_back(uniform_vector(rng, d, lo, hi));
    g.push_back(uniform_vector(rng, d, -1.0, 1.0));
  }
  return QuadraticSum(std::move(h), std::move(g));
}

void QuadraticSum::add_component_gradient(const Vector& w, SampleId i, double scale, Vector& out) const {
  out += scale * (curvature_[i].cwiseProduct(w) + linear_[i]);
}

double QuadraticSum::component_value(const Vector& w, SampleId i) const {
  return 0.5 * curvature_[i].dot(w.cwiseProduct(w)) + linear_[i].dot(w);
}

SyntheticExpectation::SyntheticExpectation(std::vector<Vector> curvature, std::vector<Vector> linear,
                                           std::vector<double> probabilities, std::uint64_t seed, double radius)
    : curvature_(std::move(curvature)),
      linear_(std::move(linear)),
      probabilities_(std::move(probabilities)),
      seed_(seed),
      radius_(radius) {
  check_quadratic_shapes(curvature_, linear_);
  if (curvature_.size() > 8) throw InvalidArgument("synthetic expectation oracle supports at most 8 outcomes");
  if (probabilities_.size() != curvature_.size()) throw InvalidArgument("one probability per outcome required");
  double total = 0.0;
  for (double p : probabilities_) {
    if (!(p > 0.0)) throw InvalidArgument("outcome probabilities must be > 0");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidArgument("outcome probabilities must sum to 1");
  if (!(radius_ > 0.0)) throw InvalidArgument("radius must be > 0");
  cumulative_.resize(probabilities_.size());
  std::partial_sum(probabilities_.begin(), probabilities_.end(), cumulative_.begin());
  cumulative_.back() = 1.0;
  lipschitz_ = std::max(mean_square_curvature_bound(curvature_, probabilities_), 1e-12);

  // Per coordinate the variance a w^2 + 2 b w + c is convex in w, so its max
  // over [-R, R] sits at an endpoint.
  sigma_sq_ = 0.0;
  const Eigen::Index d = curvature_.front().size();
  for (Eigen::Index k = 0; k < d; ++k) {
    double mh = 0.0, mg = 0.0;
    for (std::size_t j = 0; j < curvature_.size(); ++j) {
      mh += probabilities_[j] * curvature_[j][k];
      mg += probabilities_[j] * linear_[j][k];
    }
    double a = 0.0, b = 0.0, c = 0.0;
    for (std::size_t j = 0; j < curvature_.size(); ++j) {
      const double dh = curvature_[j][k] - mh;
      const double dg = linear_[j][k] - mg;
      a += probabilities_[j] * dh * dh;
      b += probabilities_[j] * dh * dg;
      c += probabilities_[j] * dg * dg;
    }
    const double at_plus = a * radius_ * radius_ + 2.0 * b * radius_ + c;
    const double at_minus = a * radius_ * radius_ - 2.0 * b * radius_ + c;
    sigma_sq_ += std::max(at_plus, at_minus);
  }
}

SyntheticExpectation SyntheticExpectation::random(std::size_t outcomes, std::size_t d, std::uint64_t seed,
                                                  double radius) {
  RngStream rng(seed, stream_id(5, StreamPurpose::kSynthetic));
  std::vector<Vector> h;
  std::vector<Vector> g;
  std::vector<double> p;
  double total = 0.0;
  for (std::size_t j = 0; j < outcomes; ++j) {
    h.push_back(uniform_vector(rng, d, -1.0, 1.0));
    g.push_back(uniform_vector(rng, d, -1.0, 1.0));
    p.push_back(0.5 + rng.uniform01());
    total += p.back();
  }
  for (double& x : p) x /= total;
  double check = std::accumulate(p.begin(), p.end(), 0.0);
  p.back() += 1.0 - check;
  return SyntheticExpectation(std::move(h), std::move(g), std::move(p), seed, radius);
}

std::size_t SyntheticExpectation::outcome_of(SampleId i) const {
  RngStream rng(seed_, i);
  const double u = rng.uniform01();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), cumulative_.size() - 1);
}

double SyntheticExpectation::outcome_probability(std::size_t k) const {
  if (k >= probabilities_.size()) throw InvalidArgument("outcome index out of range");
  return probabilities_[k];
}

void SyntheticExpectation::add_outcome_gradient(const Vector& w, std::size_t k, double scale, Vector& out) const {
  out += scale * (curvature_[k].cwiseProduct(w) + linear_[k]);
}

double SyntheticExpectation::outcome_value(const Vector& w, std::size_t k) const {
  return 0.5 * curvature_[k].dot(w.cwiseProduct(w)) + linear_[k].dot(w);
}

void SyntheticExpectation::add_component_gradient(const Vector& w, SampleId i, double scale, Vector& out) const {
  add_outcome_gradient(w, outcome_of(i), scale, out);
}

double SyntheticExpectation::component_value(const Vector& w, SampleId i) const {
  return outcome_value(w, outcome_of(i));
}

double SyntheticExpectation::variance_at(const Vector& w) const {
  Vector mean = Vector::Zero(w.size());
  for (std::size_t k = 0; k < outcome_count(); ++k) add_outcome_gradient(w, k, probabilities_[k], mean);
  double var = 0.0;
  for (std::size_t k = 0; k < outcome_count(); ++k) {
    Vector g = -mean;
    add_outcome_gradient(w, k, 1.0, g);
    var += probabilities_[k] * g.squaredNorm();
  }
  return var;
}

ExpectationView::ExpectationView(std::shared_ptr<const ProblemOracle> base, std::uint64_t seed)
    : base_(std::move(base)), seed_(seed) {
  if (!base_ || !base_->mode().is_finite_sum()) throw InvalidArgument("expectation view needs a finite-sum problem");
}

std::size_t ExpectationView::component_of(SampleId i) const {
  RngStream rng(seed_, i);
  return static_cast<std::size_t>(rng.uniform_below(base_->mode().n));
}

void ExpectationView::add_component_gradient(const Vector& w, SampleId i, double scale, Vector& out) const {
  base_->add_component_gradient(w, component_of(i), scale, out);
}

double ExpectationView::component_value(const Vector& w, SampleId i) const {
  return base_->component_value(w, component_of(i));
}

double ExpectationView::outcome_probability(std::size_t k) const { return base_->outcome_probability(k); }

void ExpectationView::add_outcome_gradient(const Vector& w, std::size_t k, double scale, Vector& out) const {
  base_->add_component_gradient(w, k, scale, out);
}

double ExpectationView::outcome_value(const Vector& w, std::size_t k) const { return base_->component_value(w, k); }

// ---------------------------------------------------------------------------

double empirical_smoothness_check(const ProblemOracle& problem, std::size_t trials, std::uint64_t seed) {
  const OracleMode mode = problem.mode();
  if (!mode.is_finite_sum()) throw UnsupportedOperation("smoothness check needs a finite-sum problem");
  const std::size_t d = problem.dimension();
  RngStream rng(seed, stream_id(6, StreamPurpose::kSynthetic));
  double worst = 0.0;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    const double scale = 1.0 + 9.0 * rng.uniform01();
    Vector w = uniform_vector(rng, d, -scale, scale);
    Vector dir = uniform_vector(rng, d, -1.0, 1.0);
    const double gap = (trial % 2 == 0) ? scale : 1e-3;
    Vector w2 = w + gap * dir;
    const double denom = (w - w2).squaredNorm();
    if (denom == 0.0) continue;
    double num = 0.0;
    Vector diff(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < mode.n; ++i) {
      diff.setZero();
      problem.add_component_gradient(w, i, 1.0, diff);
      problem.add_component_gradient(w2, i, -1.0, diff);
      num += diff.squaredNorm();
    }
    worst = std::max(worst, num / static_cast<double>(mode.n) / denom);
  }
  return worst;
}

}  // namespace proxsarah
