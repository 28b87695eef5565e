#pragma once

#include <cstdint>
#include <random>

namespace patrol {

/// Seeded 64-bit generator with platform-independent helpers. The standard
/// distributions are implementation defined, so draws go through here instead.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  /// Independent stream derived from a root seed and a pair of labels.
  static Rng derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t s = splitmix(seed ^ splitmix(a + 0x9e3779b97f4a7c15ULL));
    s = splitmix(s ^ splitmix(b + 0x632be59bd9b4e019ULL));
    return Rng(s);
  }

  std::uint64_t operator()() { return engine_(); }
  static constexpr std::uint64_t min() { return 0; }
  static constexpr std::uint64_t max() { return ~std::uint64_t{0}; }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). n must be > 0.
  std::size_t index(std::size_t n) {
    // Lemire-free simple rejection keeps results identical across platforms.
    const std::uint64_t limit = max() - (max() % n);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % n);
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  static std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::mt19937_64 engine_;
};

}  // namespace patrol
