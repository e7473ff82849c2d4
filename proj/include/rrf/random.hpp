#pragma once

#include "rrf/linalg.hpp"

#include <cstdint>

namespace rrf {

/// Reproducible stream of standard normal numbers.
///
/// Uniforms come from a counter-based SplitMix64 hash keyed by (seed, stream), so the
/// k-th number of a stream depends only on the key and k. Normals use Box-Muller; the
/// second value of each pair is cached.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  std::uint64_t counter() const { return counter_; }

  /// Raw 64-bit output.
  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  Vector normal_vector(Index n);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace rrf
