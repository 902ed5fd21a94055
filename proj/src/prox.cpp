#include "proxsarah/prox.hpp"

#include "proxsarah/errors.hpp"

#include <cmath>
#include <sstream>

namespace proxsarah {

bool all_finite(const Vector& w) { return w.allFinite(); }

void require_finite(const Vector& w, std::string_view what) {
  if (!w.allFinite()) throw InvalidArgument(std::string(what) + " has non-finite entries");
}

Regularizer Regularizer::zero() { return Regularizer(Kind::kZero, 0.0, 1.0); }

Regularizer Regularizer::l1(double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidArgument("l1 weight must be finite and >= 0");
  return Regularizer(Kind::kL1, lambda, 1.0);
}

Regularizer Regularizer::nonneg_ball(double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidArgument("ball radius must be finite and > 0");
  return Regularizer(Kind::kNonnegBall, 0.0, radius);
}

std::string Regularizer::describe() const {
  std::ostringstream out;
  out.precision(17);
  switch (kind_) {
    case Kind::kZero:
      return "zero";
    case Kind::kL1:
      out << "l1(lambda=" << lambda_ << ")";
      return out.str();
    case Kind::kNonnegBall:
      out << "nonneg_ball(radius=" << radius_ << ")";
      return out.str();
  }
  return "unknown";
}

Vector prox(const Regularizer& reg, const Vector& w, double t) {
  if (!(t >= 0.0)) throw InvalidArgument("prox scale t must be >= 0");
  switch (reg.kind()) {
    case Regularizer::Kind::kZero:
      return w;
    case Regularizer::Kind::kL1: {
      const double thr = t * reg.lambda();
      Vector out(w.size());
      for (Eigen::Index j = 0; j < w.size(); ++j) {
        const double x = w[j];
        out[j] = x > thr ? x - thr : (x < -thr ? x + thr : 0.0);
      }
      return out;
    }
    case Regularizer::Kind::kNonnegBall: {
      // Clipping to the orthant and then scaling radially is the exact projection
      // onto the intersection: scaling preserves nonnegativity.
      Vector out = w.cwiseMax(0.0);
      const double norm = out.norm();
      if (norm > reg.radius()) out *= reg.radius() / norm;
      return out;
    }
  }
  return w;
}

Vector prox(const Regularizer& reg, const Vector& w, double t, Counters& counters) {
  Vector out = prox(reg, w, t);
  ++counters.prox_calls;
  return out;
}

double objective_term(const Regularizer& reg, const Vector& w) {
  switch (reg.kind()) {
    case Regularizer::Kind::kZero:
      return 0.0;
    case Regularizer::Kind::kL1:
      return reg.lambda() * w.lpNorm<1>();
    case Regularizer::Kind::kNonnegBall: {
      constexpr double kTol = 1e-9;
      if (w.size() > 0 && w.minCoeff() < -kTol) return kInfeasible;
      if (w.norm() > reg.radius() + kTol) return kInfeasible;
      return 0.0;
    }
  }
  return 0.0;
}

Vector gradient_mapping(const Vector& w, const Vector& grad, double eta, const Regularizer& reg) {
  if (!(eta > 0.0)) throw InvalidArgument("gradient mapping step eta must be > 0");
  if (w.size() != grad.size()) throw InvalidArgument("gradient mapping: dimension mismatch");
  return (w - prox(reg, w - eta * grad, eta)) / eta;
}

}  // namespace proxsarah
