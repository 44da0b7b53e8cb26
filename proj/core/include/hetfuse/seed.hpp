#pragma once

#include <cstdint>
#include <initializer_list>

namespace hetfuse {

// splitmix64 finalizer
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives an independent stream seed from a base seed and a path of tags,
// so every consumer of randomness is reproducible regardless of call order.
template <typename... Tags>
constexpr std::uint64_t mix_seed(std::uint64_t base, Tags... tags) {
  std::uint64_t s = splitmix64(base);
  ((s = splitmix64(s ^ static_cast<std::uint64_t>(tags))), ...);
  return s;
}

}  // namespace hetfuse
