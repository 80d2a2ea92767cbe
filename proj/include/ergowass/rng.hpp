#pragma once

#include <cstdint>
#include <random>

namespace ergowass {

namespace detail {
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace detail

/// Identifies an independent random stream. Equal (seed, stream) pairs give
/// equal draws no matter which thread consumes them.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  /// Child stream, e.g. one per (grid index, replicate).
  constexpr RngStream child(std::uint64_t k) const {
    return {seed, detail::splitmix64(stream ^ detail::splitmix64(k + 0x632be59bd9b4e019ULL))};
  }

  friend constexpr bool operator==(const RngStream&, const RngStream&) = default;
};

/// Stateful generator bound to one RngStream.
class Rng {
 public:
  using result_type = std::mt19937_64::result_type;

  explicit Rng(RngStream s) {
    const std::uint64_t a = detail::splitmix64(s.seed);
    const std::uint64_t b = detail::splitmix64(s.stream ^ 0xd1b54a32d192ed03ULL);
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    engine_.seed(seq);
  }

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  double normal() { return gauss_(engine_); }
  double uniform() { return unif_(engine_); }
  std::uint64_t below(std::uint64_t n) { return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> gauss_{0.0, 1.0};
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
};

}  // namespace ergowass
