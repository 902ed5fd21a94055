#pragma once

#include <cstdint>

namespace proxsarah {

/// Counter-based generator: draw k of stream (seed, stream_id) is
/// splitmix64(key + (k+1) * golden) with key = splitmix64(seed ^ splitmix64(stream_id)).
/// Uses only 64-bit integer arithmetic, so output is identical on every platform.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  std::uint64_t draws() const { return counter_; }

  std::uint64_t next_u64();
  /// Uniform integer in [0, bound) by Lemire's multiply-shift with rejection. bound >= 1.
  std::uint64_t uniform_below(std::uint64_t bound);
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01();

  /// Independent child stream, e.g. per outer iteration and purpose.
  RngStream derive(std::uint64_t sub_stream) const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Stream purposes used by the solvers and data generators.
enum class StreamPurpose : std::uint64_t {
  kSnapshot = 1,
  kInnerBatch = 2,
  kOutputSelect = 3,
  kValidation = 4,
  kSgdBatch = 5,
  kSplit = 6,
  kSynthetic = 7,
  kExpectationDraws = 8,
};

/// Stream id for (outer iteration, purpose).
std::uint64_t stream_id(std::uint64_t outer, StreamPurpose purpose);

}  // namespace proxsarah
