#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <span>

namespace tempcomm {

/// xoshiro256** generator with SplitMix64 seeding.
///
/// Every random draw in the library goes through this type so that results
/// are bitwise reproducible across standard-library implementations. The
/// distribution helpers below are written out explicitly for the same reason
/// (the std:: distributions are implementation-defined).
class Rng {
public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0);

  /// Independent substream keyed by a seed and a path of integer keys.
  /// Two calls with the same arguments yield generators with identical
  /// output; distinct key paths give statistically independent streams.
  static Rng substream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next(); }

  std::uint64_t next();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1); never returns 0.
  double uniform_open();
  /// Uniform integer on {0, ..., bound - 1}; bound must be positive.
  std::uint64_t uniform_int(std::uint64_t bound);
  /// Unit-rate exponential.
  double exponential();
  bool bernoulli(double p) { return uniform() < p; }

  /// Index drawn with probability proportional to weights[i] (non-negative,
  /// positive sum).
  std::size_t categorical(std::span<const double> weights);

  template <class T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_int(i));
      std::swap(values[i - 1], values[j]);
    }
  }

private:
  std::uint64_t state_[4];
};

/// SplitMix64 finalizer; also used for fingerprints and key hashing.
std::uint64_t mix64(std::uint64_t x);

} // namespace tempcomm
