#ifndef VODSIM_RNG_HPP
#define VODSIM_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace vodsim {

/// splitmix64 step; passes the input state by value on purpose so callers can
/// use it as a stateless mixer.
inline std::uint64_t splitmix64(std::uint64_t state) {
  std::uint64_t z = state + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives the seed for an independent substream (arrivals of one class, hold
/// times, titles, one replication of a sweep point, ...) from a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(splitmix64(master) ^ splitmix64(~stream));
}

/// Deterministic random stream. Wraps std::mt19937_64 (whose output sequence
/// is pinned by the standard) and converts to doubles explicitly, because the
/// std::*_distribution adaptors are implementation-defined and would break the
/// same-seed-same-sequence contract across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  /// Uniform on the open interval (0, 1); never returns an exact endpoint.
  double uniform_open01() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Exponential with the given mean, strictly positive.
  double exponential(double mean) { return -mean * std::log(uniform_open01()); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace vodsim

#endif  // VODSIM_RNG_HPP
