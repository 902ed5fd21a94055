#include "proxsarah/metrics.hpp"

#include "proxsarah/errors.hpp"
#include "proxsarah/estimators.hpp"
#include "proxsarah/log.hpp"

#include <cmath>
#include <mutex>
#include <string>

namespace proxsarah {

namespace {

bool enumerable(const ProblemOracle& oracle) { return oracle.outcome_count() > 0; }

void note_validation_size(std::size_t size) {
  static std::once_flag once;
  std::call_once(once, [size] {
    log::info("metrics use a fixed validation batch of " + std::to_string(size) + " draws");
  });
}

Vector validation_gradient(const ProblemOracle& oracle, const Vector& w, std::size_t size,
                           const Reduction& reduction) {
  if (size == 0) throw InvalidArgument("validation batch must be nonempty");
  note_validation_size(size);
  Vector g = pairwise_tree_sum(
      size, oracle.dimension(),
      [&](std::size_t k, Vector& acc) { oracle.add_component_gradient(w, kValidationIdBit | k, 1.0, acc); },
      reduction);
  return g / static_cast<double>(size);
}

double validation_objective(const ProblemOracle& oracle, const Vector& w, std::size_t size,
                            const Reduction& reduction) {
  if (size == 0) throw InvalidArgument("validation batch must be nonempty");
  note_validation_size(size);
  const double sum = pairwise_tree_sum(
      size, [&](std::size_t k) { return oracle.component_value(w, kValidationIdBit | k); }, reduction);
  return sum / static_cast<double>(size);
}

}  // namespace

double grad_mapping_norm_sq(const ProblemOracle& oracle, const Regularizer& reg, const Vector& w, double eta_ref,
                            std::size_t validation_size, const Reduction& reduction) {
  if (!(eta_ref > 0.0)) throw InvalidArgument("reference step eta must be > 0");
  const Vector grad = enumerable(oracle) ? exact_gradient(oracle, w, reduction)
                                         : validation_gradient(oracle, w, validation_size, reduction);
  return gradient_mapping(w, grad, eta_ref, reg).squaredNorm();
}

double composite_objective(const ProblemOracle& oracle, const Regularizer& reg, const Vector& w,
                           std::size_t validation_size, const Reduction& reduction) {
  const double f = enumerable(oracle) ? exact_objective(oracle, w, reduction)
                                      : validation_objective(oracle, w, validation_size, reduction);
  return f + objective_term(reg, w);
}

Residual rel_residual(double f_value, double f_star) {
  if (!std::isfinite(f_star)) throw InvalidArgument("reference objective F* must be finite");
  if (f_star == 0.0) return {f_value - f_star, true};
  return {(f_value - f_star) / std::abs(f_star), false};
}

void apply_reference(RunTrace& trace, double f_star) {
  trace.f_star = f_star;
  trace.absolute_residual = false;
  for (TraceRow& row : trace.rows) {
    const Residual r = rel_residual(row.objective, f_star);
    row.rel_residual = r.value;
    trace.absolute_residual = r.absolute;
  }
  if (trace.rows.empty()) trace.absolute_residual = f_star == 0.0;
}

TraceRecorder::TraceRecorder(const ProblemOracle& oracle, const Regularizer& reg, double epoch_reference,
                             TraceOptions options, Reduction reduction)
    : oracle_(oracle),
      reg_(reg),
      epoch_reference_(epoch_reference),
      options_(std::move(options)),
      reduction_(reduction),
      start_(std::chrono::steady_clock::now()) {
  if (!(epoch_reference_ > 0.0)) throw InvalidArgument("epoch reference must be > 0");
  if (!(options_.eta_ref > 0.0)) throw InvalidArgument("reference step eta must be > 0");
  stride_sfo_ = options_.rows_per_epoch == 0 ? std::numeric_limits<double>::infinity()
                                             : epoch_reference_ / static_cast<double>(options_.rows_per_epoch);
  trace_.eta_ref = options_.eta_ref;
  trace_.validation_size = enumerable(oracle_) ? 0 : options_.validation_size;
}

void TraceRecorder::record(const Vector& w, const Counters& counters) {
  if (counters.sfo <= last_sfo_) return;
  TraceRow row;
  row.epoch_fraction = static_cast<double>(counters.sfo) / epoch_reference_;
  row.objective = composite_objective(oracle_, reg_, w, options_.validation_size, reduction_);
  row.grad_map_norm_sq =
      grad_mapping_norm_sq(oracle_, reg_, w, options_.eta_ref, options_.validation_size, reduction_);
  if (options_.train_accuracy) row.train_acc = options_.train_accuracy(w);
  if (options_.test_accuracy) row.test_acc = options_.test_accuracy(w);
  if (options_.wall_clock) {
    row.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start_)
                      .count();
  }
  trace_.rows.push_back(row);
  last_sfo_ = counters.sfo;
}

void TraceRecorder::maybe_record(const Vector& w, const Counters& counters) {
  if (static_cast<double>(counters.sfo - last_sfo_) >= stride_sfo_) record(w, counters);
}

}  // namespace proxsarah
