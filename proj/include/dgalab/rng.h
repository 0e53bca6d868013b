#ifndef DGALAB_RNG_H_
#define DGALAB_RNG_H_

#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

namespace dgalab {

// SplitMix64. The whole project draws randomness from this generator so that
// every batch, split, and forest is reproducible bit-for-bit on any platform.
//
// Reference vectors (seed 1234567): 6457827717110365317,
// 3203168211198807973, 9817491932198370423, 4593380528125082431,
// 16408922859458223821.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t Next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform integer in [0, bound). Rejection sampling keeps it unbiased:
  // draws at or above the largest multiple of `bound` are discarded.
  std::uint64_t Below(std::uint64_t bound) {
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t limit = max - (max % bound);
    std::uint64_t r;
    do {
      r = Next();
    } while (r >= limit);
    return r % bound;
  }

  // Uniform in [lo, hi] inclusive.
  std::uint64_t Between(std::uint64_t lo, std::uint64_t hi) {
    return lo + Below(hi - lo + 1);
  }

  // Uniform double in [0, 1) from the top 53 bits.
  double Uniform() { return static_cast<double>(Next() >> 11) * 0x1.0p-53; }

  std::uint64_t state() const { return state_; }

  // UniformRandomBitGenerator interface, for std::shuffle and friends.
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()() { return Next(); }

 private:
  std::uint64_t state_;
};

// Fisher-Yates driven by SplitMix64::Below, so permutations are identical
// across standard libraries (std::shuffle is implementation-defined).
template <typename T>
void Shuffle(std::vector<T>& items, SplitMix64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[rng.Below(i)]);
  }
}

// Derives an independent stream seed for sub-task `index` of a seeded job.
inline std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t index) {
  SplitMix64 mix(seed ^ (0xd1b54a32d192ed03ULL * (index + 1)));
  return mix.Next();
}

}  // namespace dgalab

#endif  // DGALAB_RNG_H_
