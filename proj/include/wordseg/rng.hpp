#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace wordseg {

// Deterministic random source. The raw mt19937_64 stream is fixed by the
// standard, and all derived draws below avoid std::*_distribution (whose
// algorithms are implementation-defined), so a seed reproduces the same
// values on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // [0, 1) with 53 random bits
  double uniform() {
    return static_cast<double>(eng_() >> 11) * (1.0 / 9007199254740992.0);
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // [0, n); n must be > 0
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(eng_() % n); }

  // Fisher-Yates, fixed iteration order
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = below(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace wordseg
