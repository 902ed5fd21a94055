#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace proxsarah {

struct CheckResult {
  std::string name;
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;  // worst inputs, filled on failure
};

struct VerifyOptions {
  /// Multiplies the constant-step variance ratio omega (mutation hook).
  double omega_scale = 1.0;
  std::uint64_t seed = 20190527;
  /// Repetitions for the output-iterate frequency test.
  std::size_t output_law_repetitions = 100000;
};

/// Exact enumeration identities of the SARAH and snapshot estimators.
std::vector<CheckResult> estimator_identity_checks(const VerifyOptions& options = {});
/// Closed-form step-size examples, recursions, tightness and lower bounds.
std::vector<CheckResult> step_size_checks(const VerifyOptions& options = {});
/// Loss and component gradients against finite differences; smoothness constants.
std::vector<CheckResult> gradient_checks(const VerifyOptions& options = {});
/// Trajectory equivalences between ProxSARAH, ProxSpiderBoost, SARAH and GD.
std::vector<CheckResult> reduction_checks(const VerifyOptions& options = {});
/// SFO and prox counts of ProxSARAH runs against n + 2 m b_hat and m + 1 per outer iteration.
std::vector<CheckResult> accounting_checks(const VerifyOptions& options = {});
/// Chi-square test of the weighted and uniform output-iterate rules.
std::vector<CheckResult> output_law_checks(const VerifyOptions& options = {});

/// Every suite above, in order.
std::vector<CheckResult> run_verification(const VerifyOptions& options = {});

/// Upper 1 - alpha quantile of the chi-square distribution.
double chi_square_critical(std::size_t degrees_of_freedom, double alpha);

/// Pearson statistic of observed counts against expected probabilities.
double chi_square_statistic(const std::vector<std::size_t>& counts, const std::vector<double>& probabilities);

/// One line per check: name, PASS/FAIL, max residual and tolerance.
std::string format_report(const std::vector<CheckResult>& results);

}  // namespace proxsarah
