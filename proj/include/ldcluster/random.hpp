#pragma once

#include <cstdint>
#include <limits>

namespace ldc {

/// Reproducible random stream keyed by (master seed, stream id).
///
/// The engine is a SplitMix64 counter: output k is a bijective mix of
/// `key + k * gamma`, so the state is just the key and a counter and
/// streams can be created cheaply (one per replication, or several per draw).
/// Satisfies UniformRandomBitGenerator.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  RandomStream(std::uint64_t master_seed, std::uint64_t stream_id);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    counter_ += kGamma;
    return mix(counter_);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
  double normal();
  /// Exponential with the given rate.
  double exponential(double rate);

  /// Independent child stream; advances this stream by one draw.
  RandomStream split();

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  explicit RandomStream(std::uint64_t key) : counter_(key) {}

  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  std::uint64_t counter_;
};

/// Stream `stream_id` of the family keyed by `master_seed`. Same inputs give
/// bit-identical draws regardless of how work is scheduled.
inline RandomStream derive_stream(std::uint64_t master_seed, std::uint64_t stream_id) {
  return RandomStream(master_seed, stream_id);
}

}  // namespace ldc
