#pragma once

#include <array>
#include <cstdint>

namespace flatcam {

/// SplitMix64 step. Used for seeding and for deriving child seeds.
std::uint64_t splitmix64(std::uint64_t& state);

/// Stateless mix of a parent seed with a stream tag.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t tag);

/// xoshiro256** 1.0 seeded by four SplitMix64 outputs.
///
/// All randomness in the toolkit flows through this generator so that bit
/// patterns, scenes and noise are identical across compilers and platforms.
/// The standard library distributions are deliberately not used because their
/// output is implementation-defined.
class Xoshiro256 {
 public:
  explicit Xoshiro256(std::uint64_t seed);

  std::uint64_t next();

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();

  /// Uniform integer in [0, n) without modulo bias. n must be > 0.
  std::uint64_t below(std::uint64_t n);

  /// Standard normal via Box-Muller (both outputs are used).
  double normal();

 private:
  std::array<std::uint64_t, 4> s_{};
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace flatcam
