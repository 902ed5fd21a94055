#pragma once

#include "proxsarah/core.hpp"
#include "proxsarah/prox.hpp"

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

namespace proxsarah {

/// Step used for the gradient-mapping metric in every solver.
inline constexpr double kReferenceEta = 0.5;

/// Validation draws used when an expectation-mode oracle cannot enumerate its law.
inline constexpr std::size_t kDefaultValidationSize = 10000;

struct TraceRow {
  double epoch_fraction = 0.0;  // sfo / epoch reference
  double objective = 0.0;       // F(w) = f(w) + psi(w)
  double rel_residual = std::numeric_limits<double>::quiet_NaN();  // filled once F* is known
  double grad_map_norm_sq = 0.0;
  std::optional<double> train_acc;
  std::optional<double> test_acc;
  std::int64_t wall_ms = 0;
};

struct RunTrace {
  std::vector<TraceRow> rows;
  double eta_ref = kReferenceEta;
  double f_star = std::numeric_limits<double>::quiet_NaN();
  bool absolute_residual = false;  // F* was zero, residuals are F - F*
  std::size_t validation_size = 0;  // 0 when metrics are exact
};

/// ||G_eta(w)||^2 with the exact gradient. For expectation-mode oracles
/// without an enumerable law the gradient is the mean over `validation_size`
/// reserved validation ids. Never touches solver counters or streams.
double grad_mapping_norm_sq(const ProblemOracle& oracle, const Regularizer& reg, const Vector& w,
                            double eta_ref = kReferenceEta, std::size_t validation_size = kDefaultValidationSize,
                            const Reduction& reduction = {});

/// F(w), with the same fallback to validation ids as grad_mapping_norm_sq.
double composite_objective(const ProblemOracle& oracle, const Regularizer& reg, const Vector& w,
                           std::size_t validation_size = kDefaultValidationSize, const Reduction& reduction = {});

struct Residual {
  double value = 0.0;
  bool absolute = false;
};

/// (F - F*)/|F*|, or F - F* flagged absolute when F* == 0. F* must be finite.
Residual rel_residual(double f_value, double f_star);

/// Fills rel_residual of every row against f_star and records it in the trace.
void apply_reference(RunTrace& trace, double f_star);

struct TraceOptions {
  double eta_ref = kReferenceEta;
  /// Rows between outer boundaries, per epoch of work. 0 records only at boundaries.
  std::size_t rows_per_epoch = 10;
  /// Validation draws for non-enumerable expectation oracles.
  std::size_t validation_size = kDefaultValidationSize;
  bool wall_clock = false;  // wall_ms stays 0 unless set, keeping outputs reproducible
  std::function<double(const Vector&)> train_accuracy;
  std::function<double(const Vector&)> test_accuracy;
};

/// Observes a run. Rows are taken at outer boundaries and whenever the work
/// since the last row exceeds epoch_reference / rows_per_epoch SFO calls.
class TraceRecorder {
 public:
  TraceRecorder(const ProblemOracle& oracle, const Regularizer& reg, double epoch_reference, TraceOptions options,
                Reduction reduction = {});

  /// Adds a row unless its epoch fraction would not strictly increase.
  void record(const Vector& w, const Counters& counters);
  /// Adds a row if the stride since the last row has been covered.
  void maybe_record(const Vector& w, const Counters& counters);

  RunTrace take() { return std::move(trace_); }
  const RunTrace& trace() const { return trace_; }

 private:
  const ProblemOracle& oracle_;
  const Regularizer& reg_;
  double epoch_reference_;
  TraceOptions options_;
  Reduction reduction_;
  double stride_sfo_;
  std::int64_t last_sfo_ = -1;
  std::chrono::steady_clock::time_point start_;
  RunTrace trace_;
};

}  // namespace proxsarah
