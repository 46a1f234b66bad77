#ifndef PACKCOUNT_RNG_HPP
#define PACKCOUNT_RNG_HPP

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>

namespace packcount {

using u128 = unsigned __int128;

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seeded, splittable xoshiro256** stream.
///
/// Every draw helper below is implemented here rather than through
/// <random> distributions so that a (seed, stream) pair produces the same
/// numbers on every standard library.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0) : seed_(seed), stream_(stream) {
    std::uint64_t mix = seed;
    std::uint64_t salt = stream;
    const std::uint64_t s = splitmix64(salt);
    mix ^= s;
    for (auto& word : state_) word = splitmix64(mix);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return next(); }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound) {
    // Lemire's multiply-shift with rejection.
    u128 m = static_cast<u128>(next()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<u128>(next()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Uniform 128-bit integer in [0, bound).
  u128 below128(u128 bound) {
    if (bound <= std::numeric_limits<std::uint64_t>::max()) {
      return below(static_cast<std::uint64_t>(bound));
    }
    int bits = 0;
    for (u128 b = bound - 1; b != 0; b >>= 1) ++bits;
    const u128 mask = bits >= 128 ? ~u128{0} : ((u128{1} << bits) - 1);
    for (;;) {
      const u128 draw = ((static_cast<u128>(next()) << 64) | next()) & mask;
      if (draw < bound) return draw;
    }
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  /// Independent child stream; deterministic in (seed, stream, id).
  Rng split(std::uint64_t id) const {
    std::uint64_t mix = stream_ ^ (0x9e3779b97f4a7c15ULL * (id + 1));
    const std::uint64_t child = splitmix64(mix);
    return Rng(seed_, child ^ (id + 1));
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  template <class T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::array<std::uint64_t, 4> state_{};
};

}  // namespace packcount

#endif  // PACKCOUNT_RNG_HPP
