#pragma once

#include <cstdint>

namespace dqs {

inline uint64_t mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// splitmix64 stream. Deterministic across platforms; used for allocation
// shuffles and test data generation.
struct SplitMix64 {
  uint64_t state;

  explicit SplitMix64(uint64_t seed) : state(seed) {}

  uint64_t next() {
    state += 0x9E3779B97F4A7C15ULL;
    return mix64(state);
  }

  // uniform in [0, 1)
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // uniform in [0, n); rejection-free modulo is fine here, bias is
  // irrelevant for n << 2^64 and we only need per-seed determinism.
  uint64_t next_below(uint64_t n) { return n ? next() % n : 0; }
};

// Counter-based generator for measurement sampling. One global instance per
// run; draw order is the engine's canonical (tick, node, instruction, shot)
// execution order, so identical seeds replay identical outcome sequences
// regardless of thread count.
struct CounterRng {
  uint64_t key;
  uint64_t counter = 0;

  explicit CounterRng(uint64_t seed) : key(mix64(seed ^ 0xA076'1D64'78BD'642FULL)) {}

  uint64_t next() {
    ++counter;
    return mix64(key + counter * 0x9E3779B97F4A7C15ULL);
  }

  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

}  // namespace dqs
