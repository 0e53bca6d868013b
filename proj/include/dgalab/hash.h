#ifndef DGALAB_HASH_H_
#define DGALAB_HASH_H_

#include <cstdint>
#include <string_view>

namespace dgalab {

inline constexpr std::uint64_t kFnvOffsetBasis = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

// 64-bit FNV-1a.
constexpr std::uint64_t Fnv1a64(std::string_view text,
                                std::uint64_t basis = kFnvOffsetBasis) {
  std::uint64_t h = basis;
  for (unsigned char c : text) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

// SplitMix64 output finalizer; a bijection on 64-bit words.
constexpr std::uint64_t Mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace dgalab

#endif  // DGALAB_HASH_H_
