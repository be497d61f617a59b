#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace evsurprise {

// Mixes a seed and a key into a new, well-separated 64-bit seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t key);

/// Splittable xoshiro256** stream.
///
/// Every stochastic operation in the library takes an Rng explicitly. Child
/// streams are derived from the seed the stream was created with (not from
/// its current position), so `split(k)` returns the same stream no matter how
/// many values the parent has already produced. That is what lets replicate
/// loops run in any order or on any number of threads.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  // Uniform on the open interval (0, 1) with 53 random bits.
  double uniform();
  double normal();
  // Gamma(shape, 1).
  double gamma(double shape);

  [[nodiscard]] Rng split(std::uint64_t key) const { return Rng(derive_seed(seed_, key)); }
  [[nodiscard]] std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> state_;
};

}  // namespace evsurprise
