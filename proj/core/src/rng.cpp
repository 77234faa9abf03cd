#include "gl0/rng.hpp"

#include "gl0/error.hpp"

namespace gl0 {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return mix64(mix64(seed + kGolden) ^ (index * kGolden + 0x632BE59BD9B4E019ULL));
}

Stream::Stream(std::uint64_t seed, std::uint64_t iteration, std::uint64_t sample,
               StreamTag tag) noexcept {
  std::uint64_t k = mix64(seed ^ 0xD1B54A32D192ED03ULL);
  k = mix64(k + iteration * kGolden);
  k = mix64(k ^ (sample + 0x8CB92BA72F3D8DD7ULL));
  k = mix64(k + static_cast<std::uint64_t>(tag) * 0xA0761D6478BD642FULL);
  key_ = k;
}

Stream::result_type Stream::operator()() noexcept {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double Stream::uniform01() noexcept {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double Stream::uniform(double lo, double hi) noexcept {
  return lo + (hi - lo) * uniform01();
}

std::uint64_t Stream::uniform_index(std::uint64_t n) {
  require(n > 0, Errc::invalid_argument, "uniform_index: empty range");
  std::uniform_int_distribution<std::uint64_t> dist(0, n - 1);
  return dist(*this);
}

std::int64_t Stream::uniform_int(std::int64_t lo, std::int64_t hi) {
  require(lo <= hi, Errc::invalid_argument, "uniform_int: empty range");
  std::uniform_int_distribution<std::int64_t> dist(lo, hi);
  return dist(*this);
}

double Stream::normal(double mean, double stddev) {
  return mean + stddev * normal_(*this);
}

}  // namespace gl0
