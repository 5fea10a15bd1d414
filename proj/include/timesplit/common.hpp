#ifndef TIMESPLIT_COMMON_HPP
#define TIMESPLIT_COMMON_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace timesplit {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;
inline constexpr double kPi = 3.1415926535897932384626433832795;

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input data (CSV, XES, spec files).
class ParseError : public Error {
public:
  explicit ParseError(const std::string& what) : Error(what) {}
};

/// Violated precondition or domain invariant.
class ValidationError : public Error {
public:
  explicit ValidationError(const std::string& what) : Error(what) {}
};

/// A configured resource cap was exceeded (e.g. exhaustive search).
class CapacityError : public Error {
public:
  explicit CapacityError(const std::string& what) : Error(what) {}
};

namespace detail {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t fnv1a(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

} // namespace detail

/// Derives an independent stream seed from a base seed and a tag.
inline uint64_t derive_seed(uint64_t seed, std::string_view tag) {
  return detail::splitmix64(seed ^ detail::fnv1a(tag));
}

inline uint64_t derive_seed(uint64_t seed, uint64_t index) {
  return detail::splitmix64(seed ^ (index * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL));
}

/// Deterministic random source. All randomized operations in the library
/// draw from this wrapper so results depend only on the seed, not on
/// standard-library distribution internals.
class Rng {
public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t next() { return eng_(); }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  uint64_t below(uint64_t n) {
    // Rejection sampling keeps the draw exactly uniform.
    uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t v = eng_();
    while (v >= limit) v = eng_();
    return v % n;
  }

  /// Poisson draw via inversion by multiplication; splits large means so the
  /// running product never underflows.
  int poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean > 30.0) return poisson(mean / 2) + poisson(mean / 2);
    double limit = std::exp(-mean);
    double prod = uniform();
    int count = 0;
    while (prod > limit) {
      prod *= uniform();
      ++count;
    }
    return count;
  }

private:
  std::mt19937_64 eng_;
};

} // namespace timesplit

#endif // TIMESPLIT_COMMON_HPP
