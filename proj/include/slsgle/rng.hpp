#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace slsgle {

// Seed wrapper. Same seed => bit-identical sample streams, on every platform.
struct RngSeed {
  std::uint64_t value = 0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

// Derive an independent child seed from a parent seed and stream ids
// (replicate index, sample size, ...). Used to give every simulation cell
// its own reproducible stream regardless of execution order.
inline RngSeed derive_seed(RngSeed parent, std::uint64_t a, std::uint64_t b = 0,
                           std::uint64_t c = 0) {
  std::uint64_t h = detail::splitmix64(parent.value ^ 0x6a09e667f3bcc908ULL);
  h = detail::splitmix64(h ^ a);
  h = detail::splitmix64(h ^ b);
  h = detail::splitmix64(h ^ c);
  return RngSeed{h};
}

// Deterministic generator: mt19937_64 uniforms (bit-exact per the standard)
// plus Box-Muller normals. std::normal_distribution is implementation-defined
// and therefore avoided.
class Rng {
 public:
  explicit Rng(RngSeed seed) : engine_(seed.value) {}

  // Uniform on (0, 1]; never returns 0 so log() below is safe.
  double uniform() {
    const std::uint64_t bits = engine_() >> 11;  // 53 random bits
    return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 6.283185307179586476925286766559 * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace slsgle
