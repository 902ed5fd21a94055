#pragma once

#include "proxsarah/core.hpp"

#include <cstddef>
#include <vector>

namespace proxsarah {

/// Per-inner-iteration pairs (gamma_t, eta_t) for t = 0..m.
///
/// Composite schedules carry averaging weights gamma_t in (0, 1] and prox
/// steps eta_t. Non-composite schedules ("combined") use gamma_t = 1 and put the
/// whole step in eta_t; their output-iterate weights are the eta_t.
struct StepSchedule {
  std::vector<double> gammas;
  std::vector<double> etas;
  double sigma_m = 0.0;   // sum of the selection weights
  bool combined = false;  // true for non-composite schedules
  bool clamped = false;   // some gamma was cut back to 1

  std::size_t m() const { return gammas.empty() ? 0 : gammas.size() - 1; }
  /// Probability mass of inner index t in the weighted output rule (unnormalized).
  double weight(std::size_t t) const { return combined ? etas[t] : gammas[t]; }
};

/// Which bracket the adaptive backward recursion uses:
///   kEtaBracket:  gamma_t = delta / (L [eta + w L sum_{j>t} gamma_j])
///   kUnitBracket: gamma_t = delta / (L [1   + w L sum_{j>t} gamma_j])
enum class AdaptiveForm { kEtaBracket, kUnitBracket };

// Variance-ratio constants.
/// 3(n-b)/(2b(n-1)) in finite-sum mode, 3/(2b) in expectation mode.
double constant_step_omega(std::size_t b_hat, const OracleMode& mode);
/// (1 + 2 eta^2)(n-b)/(b(n-1)).
double adaptive_step_omega(double eta, std::size_t b_hat, std::size_t n);
/// (n-b)/(b(n-1)) in finite-sum mode, 1/b in expectation mode.
double noncomposite_rho(std::size_t b_hat, const OracleMode& mode);

/// Constant gamma = 1/(L sqrt(omega m)), eta = 2 sqrt(omega m)/(4 sqrt(omega m) + 1).
/// gamma is clamped to 1 with a warning when the formula exceeds it.
StepSchedule constant_composite(double L, std::size_t m, std::size_t b_hat, const OracleMode& mode);

/// Backward recursion with fixed eta in (0, 2/3), delta = 2/eta - 3. The
/// lower bounds on gamma_0 and on the sum are checked before clamping.
StepSchedule adaptive_composite(double L, double eta, std::size_t m, std::size_t b_hat, std::size_t n,
                                AdaptiveForm form = AdaptiveForm::kEtaBracket);

/// Combined steps eta_m = 1/L, eta_{m-t} = 1/(L(1 + rho L sum_{j=1..t} eta_{m-j+1})).
StepSchedule adaptive_noncomposite(double L, std::size_t m, double rho);

/// Constant combined step 2/(L(1 + sqrt(4m + 1))).
StepSchedule fixed_noncomposite(double L, std::size_t m);

/// gamma_m = delta/L, gamma_t = delta/(L[1 + nu L sum_{j>t} gamma_j]). Generic
/// recursion: the values are not clamped to (0, 1].
StepSchedule tight_backward_recursion(double L, double delta, double nu, std::size_t m);

/// Constant gamma = 2 delta / (L (sqrt(1 + 4 delta nu m) + 1)), unclamped.
StepSchedule tight_constant_steps(double L, double delta, double nu, std::size_t m);

/// max_t |nu L^2 gamma_t sum_{j>t} gamma_j - delta + L gamma_t| including t = m.
double tight_recursion_residual(const StepSchedule& schedule, double L, double delta, double nu);

/// Lower bounds used as postconditions.
double adaptive_gamma0_lower_bound(double L, double delta, double omega, std::size_t m);
double adaptive_sigma_lower_bound(double L, double delta, double omega, std::size_t m);
double noncomposite_sigma_lower_bound(double L, double rho, std::size_t m);

struct TradeoffChoice {
  std::size_t b_hat = 1;
  double eta = 0.0;
  double c = 0.0;  // 2 / (3 L^2 gamma_bar^2)
};

/// Picks the inner batch size and prox step for a target averaging weight:
/// C = 2/(3 L^2 gamma_bar^2), b_hat = floor(mn / (Cn + m - C)) clamped to
/// [1, n-1], eta = 2/(4 + L gamma_bar). Requires m >= C.
TradeoffChoice tradeoff_config(double gamma_bar, double L, std::size_t m, std::size_t n);

/// gamma and eta repeated m+1 times.
StepSchedule constant_schedule(double gamma, double eta, std::size_t m);

/// Cuts gammas above 1 back to 1 (logging a warning) and refreshes sigma_m.
void clamp_gammas(StepSchedule& schedule);

namespace detail {
/// constant_composite with omega multiplied by `omega_scale` (mutation hook for verification).
StepSchedule constant_composite(double L, std::size_t m, std::size_t b_hat, const OracleMode& mode,
                                double omega_scale);
}  // namespace detail

}  // namespace proxsarah
