#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string_view>

namespace proxsarah {

/// Dense iterate w in R^d.
using Vector = Eigen::VectorXd;

/// Component index in finite-sum mode, draw counter in expectation mode.
using SampleId = std::uint64_t;

/// Work counters owned by the calling solver.
struct Counters {
  std::int64_t sfo = 0;         // individual stochastic gradient evaluations
  std::int64_t prox_calls = 0;  // proximal operator evaluations

  friend bool operator==(const Counters&, const Counters&) = default;
};

bool all_finite(const Vector& w);

/// Throws InvalidArgument naming `what` when w has a NaN or Inf entry.
void require_finite(const Vector& w, std::string_view what);

}  // namespace proxsarah
