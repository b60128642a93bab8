#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace hgm {

// SplitMix64 step; used for seed derivation and short-lived substreams.
inline std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Separates independent keyed streams derived from one run seed.
enum class StreamDomain : std::uint64_t {
  Decision = 1,
  ActionOutcome = 2,
  ActionLatency = 3,
  ActionFailure = 4,
  Rollout = 5,
  Bootstrap = 6,
  Test = 99,
};

std::uint64_t derive_seed(std::uint64_t seed, StreamDomain domain, std::uint64_t index) noexcept;

// Maps a 64-bit word to a double in the open interval (0, 1).
inline double word_to_open_unit(std::uint64_t word) noexcept {
  return (static_cast<double>(word >> 11) + 0.5) * 0x1.0p-53;
}

// Deterministic random stream with a documented per-call word budget:
//   next_word / uniform_open / index_below consume one 64-bit word,
//   normal consumes two (Box-Muller, cosine branch only).
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  static RandomStream keyed(std::uint64_t seed, StreamDomain domain, std::uint64_t index) {
    return RandomStream(derive_seed(seed, domain, index));
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return next_word(); }

  std::uint64_t next_word() {
    ++consumed_;
    return engine_();
  }
  double uniform_open() { return word_to_open_unit(next_word()); }
  double normal();

  // Uniform integer in [0, n); n must be positive.
  std::size_t index_below(std::size_t n);

  std::uint64_t words_consumed() const noexcept { return consumed_; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t consumed_ = 0;
};

}  // namespace hgm
