#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace gl0 {

/// Purpose tags mixed into stream keys so that independent consumers of the
/// same (seed, iteration, sample) never share draws.
enum class StreamTag : std::uint64_t {
  perturbation = 1,
  sample = 2,
  stopping_index = 3,
  initialization = 4,
  estimation_points = 5,
  estimation_samples = 6,
  holdout = 7,
  selection = 8,
  dataset = 9,
  run = 10,
  generic = 11,
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derives a child seed from a parent seed and an index.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

/// Counter-based random stream. The n-th output is a pure function of the
/// stream key and n, so streams keyed on (seed, iteration, sample, tag) can be
/// regenerated in any order and from any thread.
///
/// Satisfies UniformRandomBitGenerator so it can drive <random> distributions.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit Stream(std::uint64_t seed, std::uint64_t iteration = 0,
                  std::uint64_t sample = 0,
                  StreamTag tag = StreamTag::generic) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() noexcept;
  /// Uniform on [lo, hi] by scaled unit-interval conversion.
  double uniform(double lo, double hi) noexcept;
  /// Uniform integer on {0, ..., n - 1}; n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);
  /// Uniform integer on {lo, ..., hi}.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  double normal(double mean = 0.0, double stddev = 1.0);

  [[nodiscard]] std::uint64_t key() const noexcept { return key_; }
  [[nodiscard]] std::uint64_t draws() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace gl0
