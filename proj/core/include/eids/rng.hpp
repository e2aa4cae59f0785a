#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace eids {

/// Deterministic 64-bit generator (SplitMix64). Every random draw in the
/// toolkit flows from one user seed through named substreams, so runs are
/// reproducible bit for bit; standard-library distributions are avoided
/// because their output is implementation-defined.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : state_(seed) {}

  /// Substream derived from (seed, tag); distinct tags give independent
  /// streams for shuffling, init, dropout, ...
  RngStream(std::uint64_t seed, std::string_view tag) : state_(seed ^ hash_tag(tag)) {
    next_u64();  // decorrelate nearby seeds
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53-bit resolution.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  /// Uniform integer in [0, n), n > 0. Rejection sampling keeps it exact.
  std::uint64_t next_below(std::uint64_t n) {
    const std::uint64_t rem = (0 - n) % n;  // 2^64 mod n
    const std::uint64_t bound = 0 - rem;    // largest multiple of n (0 means all accepted)
    std::uint64_t x = next_u64();
    while (bound != 0 && x >= bound) x = next_u64();
    return x % n;
  }

  static std::uint64_t hash_tag(std::string_view tag) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (char c : tag) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
    return h;
  }

 private:
  std::uint64_t state_;
};

/// Fisher-Yates with a pinned algorithm; std::shuffle would not be
/// reproducible across standard libraries.
template <typename T>
void deterministic_shuffle(std::vector<T>& items, RngStream& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.next_below(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace eids
