#pragma once

#include "proxsarah/types.hpp"

#include <limits>
#include <string>

namespace proxsarah {

/// The nonsmooth term psi of F = f + psi.
class Regularizer {
 public:
  enum class Kind { kZero, kL1, kNonnegBall };

  static Regularizer zero();
  /// psi(w) = lambda * ||w||_1, lambda >= 0.
  static Regularizer l1(double lambda);
  /// Indicator of {w : ||w|| <= radius, w >= 0}.
  static Regularizer nonneg_ball(double radius = 1.0);

  Kind kind() const { return kind_; }
  double lambda() const { return lambda_; }
  double radius() const { return radius_; }
  bool is_indicator() const { return kind_ == Kind::kNonnegBall; }
  std::string describe() const;

 private:
  Regularizer(Kind kind, double lambda, double radius) : kind_(kind), lambda_(lambda), radius_(radius) {}

  Kind kind_;
  double lambda_;
  double radius_;
};

/// Value returned by objective_term outside the domain of an indicator.
inline constexpr double kInfeasible = std::numeric_limits<double>::infinity();

inline bool is_infeasible(double value) { return value == kInfeasible; }

/// prox_{t psi}(w). For L1 the threshold is t * lambda; indicators ignore t.
Vector prox(const Regularizer& reg, const Vector& w, double t);

/// Same as above and counts one prox call.
Vector prox(const Regularizer& reg, const Vector& w, double t, Counters& counters);

/// psi(w); kInfeasible when an indicator constraint is violated by more than 1e-9.
double objective_term(const Regularizer& reg, const Vector& w);

/// Gradient mapping (w - prox_{eta psi}(w - eta * grad)) / eta. Not counted as a prox call.
Vector gradient_mapping(const Vector& w, const Vector& grad, double eta, const Regularizer& reg);

}  // namespace proxsarah
