#pragma once

#include <cstdint>

namespace fkbridge {

/// Deterministic, splittable pseudorandom stream (xoshiro256++ seeded
/// through SplitMix64).
///
/// A value type: copying captures the full generator state, and any two
/// streams constructed from the same (seed, stream_id) produce bit-identical
/// draw sequences on every platform and under any thread partition. Derived
/// substreams let samplers hand one independent stream to each path.
class RngStream {
 public:
  RngStream() : RngStream(0, 0) {}
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// Fresh stream for substream `index` (stream_id + index). Callers that
  /// derive substreams must not draw from the parent and must reserve
  /// disjoint index ranges.
  RngStream substream(std::uint64_t index) const {
    return RngStream(seed_, stream_id_ + index);
  }

  std::uint64_t next_u64();

  /// Uniform double in [0, 1).
  double uniform01();

  /// Uniform double in (0, 1]; safe as a log argument.
  double uniform_pos();

  /// Standard normal via Box-Muller (the antithetic partner is cached).
  double normal();

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t state_[4];
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace fkbridge
