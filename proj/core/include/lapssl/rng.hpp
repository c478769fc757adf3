#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace lapssl {

// Seeded generator with portable derived draws. The standard
// distributions are implementation-defined, so uniform/normal/index are
// built directly on the mt19937 word stream to keep outputs identical
// across toolchains.
class Prng {
 public:
  explicit Prng(unsigned seed) : gen_(seed) {}

  // Uniform in [0, 1) with 53 random bits.
  double uniform() {
    const uint64_t hi = gen_();
    const uint64_t lo = gen_();
    return static_cast<double>(((hi << 32) | lo) >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // Marsaglia polar method.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

  // Uniform index in [0, n) by rejection.
  int index(int n) {
    const uint32_t bound = static_cast<uint32_t>(n);
    const uint32_t limit = UINT32_MAX - UINT32_MAX % bound;
    uint32_t r;
    do {
      r = gen_();
    } while (r >= limit);
    return static_cast<int>(r % bound);
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace lapssl
