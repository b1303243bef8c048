#pragma once

#include <array>
#include <cstdint>

namespace nvh {

/// Counter-based pseudo-random generator (Philox4x32-10).
///
/// Every generator is identified by a (seed, stream) pair. Streams derived
/// through substream() are statistically independent, so parallel chains,
/// bootstrap replicates and CV runs can each own a stream whose output does
/// not depend on how many sibling streams exist or in which order they run.
class CounterRng {
 public:
  CounterRng() : CounterRng(0, 0) {}
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1); safe as a log() argument.
  double uniform_pos();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi);
  /// Uniform integer in [0, n), n > 0.
  std::uint64_t uniform_int(std::uint64_t n);
  /// Standard normal draw (Box-Muller, second value cached).
  double normal();
  double normal(double mean, double sd);

  /// Independent generator for sub-task `index` of this stream.
  CounterRng substream(std::uint64_t index) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  /// Raw Philox4x32-10 block function, exposed for known-answer tests.
  static std::array<std::uint32_t, 4> philox4x32(
      std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

 private:
  void refill();

  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
  std::array<std::uint32_t, 2> key_{};
  std::array<std::uint32_t, 4> counter_{};
  std::array<std::uint32_t, 4> block_{};
  int block_pos_ = 4;
  bool has_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

}  // namespace nvh
