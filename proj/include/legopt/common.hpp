#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace legopt {

// Error taxonomy. The CLI maps ConfigError and UsageError to exit code 2,
// everything else to exit code 1.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct UsageError : Error {
  using Error::Error;
};
struct DomainError : ConfigError {
  using ConfigError::ConfigError;
};
struct FormatError : Error {
  using Error::Error;
};
struct DataError : Error {
  using Error::Error;
};
struct NumericError : Error {
  using Error::Error;
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of the random stream owned by one environment for one episode:
///   mix64(mix64(mix64(master) ^ env_index) ^ reset_counter)
/// Alternate implementations reproduce our streams by using this mix and
/// seeding std::mt19937_64 with it.
constexpr std::uint64_t stream_seed(std::uint64_t master, std::uint64_t env_index,
                                    std::uint64_t reset_counter) {
  return mix64(mix64(mix64(master) ^ env_index) ^ reset_counter);
}

using Rng = std::mt19937_64;

// The standard distributions are implementation-defined; these transforms are
// not, so streams stay bit-identical across standard libraries.

/// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

/// Standard normal via Box-Muller (one draw per call, second value dropped).
inline double normal01(Rng& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Uniform integer in [0, n).
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)) % n;
}

inline bool all_finite(const double* p, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(p[i])) return false;
  return true;
}

}  // namespace legopt
