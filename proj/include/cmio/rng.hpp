#pragma once

#include <cstdint>
#include <random>

namespace cmio {

/// Portable random stream used by every sampler in the library.
///
/// The bit stream is std::mt19937_64 seeded with a single 64-bit value, whose
/// output sequence is fixed by the C++ standard. Uniforms take the top 53 bits
/// of one draw. Normals use the basic Box-Muller transform: each pair of
/// uniforms (u1, u2) yields sqrt(-2 ln u1) * cos(2 pi u2) first and the
/// matching sin() value on the next call. Nothing here goes through
/// std::*_distribution, so identical seeds give identical streams on every
/// conforming platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform();

  double normal();

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// SplitMix64 finalizer; used to decorrelate derived seeds.
std::uint64_t mix64(std::uint64_t x);

/// Seed for child stream `index` of `parent` (replicates, restarts).
std::uint64_t child_seed(std::uint64_t parent, std::uint64_t index);

}  // namespace cmio
