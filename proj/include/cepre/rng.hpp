#ifndef CEPRE_RNG_HPP
#define CEPRE_RNG_HPP

#include <complex>
#include <cstdint>
#include <random>

// Deterministic random streams. Every consumer derives its own stream from
// (master seed, channel index, purpose tag), so results are bit-identical
// across reruns and independent of how channels are scheduled onto workers.
// Gaussians are produced by an explicit Box-Muller transform on 53-bit
// uniforms instead of std::normal_distribution, whose output sequence is
// implementation-defined.

namespace cepre::rng {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a;
  std::uint64_t h = splitmix64(s);
  s ^= b + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return splitmix64(s);
}

enum class StreamKind : std::uint64_t {
  kChannel = 0x6368616eULL,  // "chan"
  kSymbols = 0x73796d62ULL,  // "symb"
  kNoise = 0x6e6f6973ULL,    // "nois"
};

class Stream {
 public:
  explicit Stream(std::uint64_t seed) : gen_(seed) {}

  // uniform double in [0, 1) with 53 random bits
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log() finite
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 6.283185307179586476925286766559 * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  // circularly-symmetric complex Gaussian, unit variance: CN(0, 1)
  std::complex<double> cn01() {
    const double re = normal();
    const double im = normal();
    return {re * 0.7071067811865475244, im * 0.7071067811865475244};
  }

  std::uint64_t next_u64() { return gen_(); }

  // uniform integer in [0, bound)
  std::uint64_t below(std::uint64_t bound) {
    // rejection sampling over the largest multiple of bound
    const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % bound;
    std::uint64_t v;
    do {
      v = gen_();
    } while (v >= limit);
    return v % bound;
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

inline std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index, StreamKind kind) {
  return mix(mix(master_seed, index), static_cast<std::uint64_t>(kind));
}

inline Stream substream(std::uint64_t master_seed, std::uint64_t index, StreamKind kind) {
  return Stream(derive_seed(master_seed, index, kind));
}

}  // namespace cepre::rng

#endif  // CEPRE_RNG_HPP
