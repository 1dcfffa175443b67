#pragma once

#include <cstdint>
#include <stdexcept>

#include "sentlab/matrix.hpp"

namespace sentlab {

// xoshiro256** seeded through splitmix64. Fixed generator so that a seed
// means the same draw sequence on every platform; std:: distributions are
// not portable across standard libraries.
class SeededRng {
 public:
  explicit SeededRng(uint64_t seed) : seed_(seed) {
    uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
  }

  uint64_t seed() const { return seed_; }

  uint64_t next_u64() {
    const uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_unit() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n), unbiased via rejection.
  uint64_t next_bounded(uint64_t n) {
    if (n == 0) throw std::invalid_argument("next_bounded: n must be > 0");
    const uint64_t threshold = (0 - n) % n;
    for (;;) {
      uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  double next_uniform(double lo, double hi) {
    return lo + next_unit() * (hi - lo);
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  static uint64_t splitmix64(uint64_t& s) {
    uint64_t z = (s += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  uint64_t seed_;
  uint64_t state_[4];
};

// I.i.d. uniform entries in [lo, hi), consumed in row-major order.
template <class S>
Matrix<S> seeded_uniform_init(SeededRng& rng, uint32_t rows, uint32_t cols,
                              double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("seeded_uniform_init: lo >= hi");
  Matrix<S> m(rows, cols);
  for (auto& v : m.data) {
    S x = S(rng.next_uniform(lo, hi));
    if (double(x) >= hi) x = S(std::nextafter(hi, lo));  // float rounding guard
    v = x;
  }
  return m;
}

template <class S>
void fill_uniform(SeededRng& rng, std::span<S> out, double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("fill_uniform: lo >= hi");
  for (auto& v : out) {
    S x = S(rng.next_uniform(lo, hi));
    if (double(x) >= hi) x = S(std::nextafter(hi, lo));
    v = x;
  }
}

}  // namespace sentlab
