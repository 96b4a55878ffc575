#pragma once

#include <cstdint>
#include <random>

namespace netlod {

/// Seedable RNG with explicit substream derivation. All draws go through
/// next_u64() so that results are bit-identical across platforms; std
/// distributions are avoided on purpose (their output is not portable).
///
/// Generator identity (recorded in manifests): "mt19937_64/splitmix64-streams".
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  /// Independent stream for (layer, line, ...) indices. Derived as
  /// mt19937_64(splitmix64(seed + golden * (idx + 1))).
  Rng substream(std::uint64_t idx) const {
    return Rng(splitmix64(seed_ + 0x9e3779b97f4a7c15ULL * (idx + 1)));
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * next_double(); }

  /// Uniform integer in [0, n). Rejection-free modulo is fine here; n is
  /// tiny compared to 2^64 so the bias is far below anything observable.
  std::uint64_t uniform_int(std::uint64_t n) { return next_u64() % n; }

  static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  static constexpr const char* kGeneratorId = "mt19937_64/splitmix64-streams";

private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
};

} // namespace netlod
