#pragma once

#include <cstdint>
#include <limits>

namespace twophase {

/// SplitMix64 generator. Satisfies UniformRandomBitGenerator; cheap to seed,
/// so every Monte-Carlo replicate can own a fresh stream.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed = 0) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 bits of precision.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) noexcept { return uniform() < p; }

 private:
  std::uint64_t state_;
};

/// Independent stream families. A replicate's stream is a pure function of
/// (master seed, tag, index), so replicates can run in any order.
enum class StreamTag : std::uint64_t {
  single_phase = 1,
  phase_one = 2,
  phase_two = 3,
  second_phase_selection = 4,
  cross_entropy = 5,
  random_sets = 6,
  shapley = 7,
  trivalency = 8,
  probe = 9,
  objective = 10,
};

std::uint64_t mix64(std::uint64_t x) noexcept;

std::uint64_t derive_seed(std::uint64_t master, StreamTag tag, std::uint64_t index) noexcept;

inline SplitMix64 make_stream(std::uint64_t master, StreamTag tag, std::uint64_t index) noexcept {
  return SplitMix64(derive_seed(master, tag, index));
}

}  // namespace twophase
