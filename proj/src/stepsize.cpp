#include "proxsarah/stepsize.hpp"

#include "proxsarah/errors.hpp"
#include "proxsarah/log.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

namespace proxsarah {
namespace {

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) throw InvalidArgument(std::string(name) + " must be finite and > 0");
}

void finalize(StepSchedule& s) {
  s.sigma_m = 0.0;
  for (std::size_t t = 0; t < s.gammas.size(); ++t) s.sigma_m += s.weight(t);
}

// Relative slack for comparing against closed-form bounds that can be tight.
bool at_least(double value, double bound) { return value >= bound * (1.0 - 1e-12) - 1e-300; }

// Shared backward pass: x_m = delta/L, x_t = delta/(L[head + w L sum_{j>t} x_j]).
std::vector<double> backward(double L, double delta, double head, double w, std::size_t m) {
  std::vector<double> x(m + 1);
  x[m] = delta / L;
  double tail = x[m];
  for (std::size_t k = m; k-- > 0;) {
    x[k] = delta / (L * (head + w * L * tail));
    tail += x[k];
  }
  return x;
}

}  // namespace

double constant_step_omega(std::size_t b_hat, const OracleMode& mode) {
  if (b_hat < 1) throw InvalidArgument("inner batch size must be >= 1");
  const double b = static_cast<double>(b_hat);
  if (!mode.is_finite_sum()) return 3.0 / (2.0 * b);
  const double n = static_cast<double>(mode.n);
  return 3.0 * (n - b) / (2.0 * b * (n - 1.0));
}

double adaptive_step_omega(double eta, std::size_t b_hat, std::size_t n) {
  const double b = static_cast<double>(b_hat);
  const double nd = static_cast<double>(n);
  return (1.0 + 2.0 * eta * eta) * (nd - b) / (b * (nd - 1.0));
}

double noncomposite_rho(std::size_t b_hat, const OracleMode& mode) {
  if (b_hat < 1) throw InvalidArgument("inner batch size must be >= 1");
  const double b = static_cast<double>(b_hat);
  if (!mode.is_finite_sum()) return 1.0 / b;
  const double n = static_cast<double>(mode.n);
  if (b_hat >= mode.n) return 0.0;
  return (n - b) / (b * (n - 1.0));
}

StepSchedule detail::constant_composite(double L, std::size_t m, std::size_t b_hat, const OracleMode& mode,
                                        double omega_scale) {
  require_positive(L, "L");
  if (m < 1) throw InvalidArgument("epoch length m must be >= 1");
  if (b_hat < 1) throw InvalidArgument("inner batch size must be >= 1");
  if (mode.is_finite_sum() && b_hat > mode.n - 1) {
    throw InvalidArgument("constant step-sizes need b_hat <= n-1 (b_hat = n makes omega vanish)");
  }
  const double omega = constant_step_omega(b_hat, mode) * omega_scale;
  const double root = std::sqrt(omega * static_cast<double>(m));
  const double gamma = 1.0 / (L * root);
  const double eta = 2.0 * root / (4.0 * root + 1.0);
  StepSchedule s = constant_schedule(gamma, eta, m);
  clamp_gammas(s);
  return s;
}

StepSchedule constant_composite(double L, std::size_t m, std::size_t b_hat, const OracleMode& mode) {
  return detail::constant_composite(L, m, b_hat, mode, 1.0);
}

double adaptive_gamma0_lower_bound(double L, double delta, double omega, std::size_t m) {
  return delta / (L * (1.0 + delta * omega * static_cast<double>(m)));
}

double adaptive_sigma_lower_bound(double L, double delta, double omega, std::size_t m) {
  const double md = static_cast<double>(m);
  return 2.0 * delta * (md + 1.0) / (L * (std::sqrt(2.0 * delta * omega * md + 1.0) + 1.0));
}

double noncomposite_sigma_lower_bound(double L, double rho, std::size_t m) {
  const double md = static_cast<double>(m);
  return 2.0 * (md + 1.0) / ((std::sqrt(2.0 * rho * md + 1.0) + 1.0) * L);
}

StepSchedule adaptive_composite(double L, double eta, std::size_t m, std::size_t b_hat, std::size_t n,
                                AdaptiveForm form) {
  require_positive(L, "L");
  if (!(eta > 0.0 && eta < 2.0 / 3.0)) throw InvalidArgument("adaptive step-sizes need 0 < eta < 2/3");
  if (n < 2 || b_hat < 1 || b_hat > n - 1) throw InvalidArgument("adaptive step-sizes need 1 <= b_hat <= n-1");
  const double delta = 2.0 / eta - 3.0;
  const double omega = adaptive_step_omega(eta, b_hat, n);
  const double head = form == AdaptiveForm::kEtaBracket ? eta : 1.0;

  StepSchedule s;
  s.gammas = backward(L, delta, head, omega, m);
  s.etas.assign(m + 1, eta);
  finalize(s);

  // Postconditions on the unclamped values.
  if (!at_least(s.gammas[0], adaptive_gamma0_lower_bound(L, delta, omega, m))) {
    throw NumericalError("adaptive schedule: gamma_0 below its lower bound");
  }
  if (!at_least(s.sigma_m, adaptive_sigma_lower_bound(L, delta, omega, m))) {
    throw NumericalError("adaptive schedule: sum of gammas below its lower bound");
  }
  for (std::size_t t = 0; t + 1 < m; ++t) {
    if (!(s.gammas[t] < s.gammas[t + 1])) throw NumericalError("adaptive schedule: gammas not increasing");
  }
  // The last step only increases when the bracket at t = m-1 exceeds 1.
  const bool last_increases = form == AdaptiveForm::kUnitBracket || head + omega * delta > 1.0;
  if (m >= 1 && last_increases && !(s.gammas[m - 1] < s.gammas[m])) {
    throw NumericalError("adaptive schedule: gamma_{m-1} >= gamma_m");
  }
  clamp_gammas(s);
  return s;
}

StepSchedule adaptive_noncomposite(double L, std::size_t m, double rho) {
  require_positive(L, "L");
  require_positive(rho, "rho");
  StepSchedule s;
  s.combined = true;
  s.etas = backward(L, 1.0, 1.0, rho, m);
  s.gammas.assign(m + 1, 1.0);
  finalize(s);
  if (!at_least(s.sigma_m, noncomposite_sigma_lower_bound(L, rho, m))) {
    throw NumericalError("non-composite schedule: sum of steps below its lower bound");
  }
  return s;
}

StepSchedule fixed_noncomposite(double L, std::size_t m) {
  require_positive(L, "L");
  StepSchedule s;
  s.combined = true;
  s.etas.assign(m + 1, 2.0 / (L * (1.0 + std::sqrt(4.0 * static_cast<double>(m) + 1.0))));
  s.gammas.assign(m + 1, 1.0);
  finalize(s);
  return s;
}

StepSchedule tight_backward_recursion(double L, double delta, double nu, std::size_t m) {
  require_positive(L, "L");
  require_positive(delta, "delta");
  require_positive(nu, "nu");
  StepSchedule s;
  s.gammas = backward(L, delta, 1.0, nu, m);
  s.etas.assign(m + 1, 1.0);
  finalize(s);
  return s;
}

StepSchedule tight_constant_steps(double L, double delta, double nu, std::size_t m) {
  require_positive(L, "L");
  require_positive(delta, "delta");
  require_positive(nu, "nu");
  const double gamma = 2.0 * delta / (L * (std::sqrt(1.0 + 4.0 * delta * nu * static_cast<double>(m)) + 1.0));
  StepSchedule s;
  s.gammas.assign(m + 1, gamma);
  s.etas.assign(m + 1, 1.0);
  finalize(s);
  return s;
}

double tight_recursion_residual(const StepSchedule& schedule, double L, double delta, double nu) {
  const std::size_t m = schedule.m();
  double worst = std::abs(L * schedule.gammas[m] - delta);
  double tail = 0.0;
  for (std::size_t k = m + 1; k-- > 0;) {
    if (k < m) {
      const double g = schedule.gammas[k];
      worst = std::max(worst, std::abs(nu * L * L * g * tail - delta + L * g));
    }
    tail += schedule.gammas[k];
  }
  return worst;
}

TradeoffChoice tradeoff_config(double gamma_bar, double L, std::size_t m, std::size_t n) {
  require_positive(L, "L");
  if (!(gamma_bar > 0.0 && gamma_bar <= 1.0)) throw InvalidArgument("gamma_bar must lie in (0, 1]");
  if (m < 1) throw InvalidArgument("epoch length m must be >= 1");
  if (n < 2) throw InvalidArgument("trade-off rule needs n >= 2");
  TradeoffChoice out;
  out.c = 2.0 / (3.0 * L * L * gamma_bar * gamma_bar);
  const double md = static_cast<double>(m);
  const double nd = static_cast<double>(n);
  if (md < out.c) {
    std::ostringstream msg;
    msg << "trade-off rule needs m >= C = 2/(3 L^2 gamma_bar^2) = " << out.c << " but m = " << m
        << "; raise m or gamma_bar";
    throw ConfigError(msg.str());
  }
  const double raw = md * nd / (out.c * (nd - 1.0) + md);
  const auto floored = static_cast<std::size_t>(std::floor(raw + 1e-9));
  out.b_hat = std::clamp<std::size_t>(floored, 1, n - 1);
  out.eta = 2.0 / (4.0 + L * gamma_bar);
  return out;
}

StepSchedule constant_schedule(double gamma, double eta, std::size_t m) {
  require_positive(gamma, "gamma");
  require_positive(eta, "eta");
  StepSchedule s;
  s.gammas.assign(m + 1, gamma);
  s.etas.assign(m + 1, eta);
  finalize(s);
  return s;
}

void clamp_gammas(StepSchedule& schedule) {
  const double peak = *std::max_element(schedule.gammas.begin(), schedule.gammas.end());
  if (peak <= 1.0) return;
  std::ostringstream msg;
  msg << "averaging weight formula gives " << peak << " > 1; clamping to 1";
  log::warn(msg.str());
  for (double& g : schedule.gammas) g = std::min(g, 1.0);
  schedule.clamped = true;
  finalize(schedule);
}

}  // namespace proxsarah
