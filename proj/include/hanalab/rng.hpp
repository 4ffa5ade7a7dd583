#pragma once

#include <cstdint>
#include <vector>

namespace hanalab {

// SplitMix64 stream. Every random draw in the project goes through this so
// that runs are bit-exact across platforms and standard libraries.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, n). Modulo bias is irrelevant at the n used here and the
  // mapping is frozen: changing it would change every dataset.
  uint64_t next_below(uint64_t n) { return n <= 1 ? 0 : next() % n; }

  // Uniform double in [0, 1) with 53 random bits.
  double next_double() { return double(next() >> 11) * (1.0 / 9007199254740992.0); }

  uint64_t state() const { return state_; }

 private:
  uint64_t state_;
};

// Deterministic per-item seed derivation (game ids, split shuffles, ...).
inline uint64_t derive_seed(uint64_t master, uint64_t index) {
  SplitMix64 s(master + 0x9e3779b97f4a7c15ULL * (index + 1));
  return s.next();
}

// Fisher-Yates driven by a SplitMix64 stream.
template <typename T>
void fisher_yates_shuffle(std::vector<T>& items, SplitMix64& rng) {
  for (size_t i = items.size(); i > 1; --i) {
    size_t j = size_t(rng.next_below(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace hanalab
