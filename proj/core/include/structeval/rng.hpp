#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>

namespace structeval {

// Deterministic random source. The engine is std::mt19937_64 (bit-exact by
// standard), but all distribution logic is hand-rolled here because the
// standard distributions are implementation-defined and would break
// golden-file tests across toolchains.
class Rng {
public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform in [0, n). Rejection sampling keeps it unbiased.
  uint64_t next_below(uint64_t n);

  // Uniform double in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  bool next_bernoulli(double p) { return next_double() < p; }

  // Standard normal via Box-Muller; the spare value is cached.
  double next_gaussian();

  char next_lowercase() { return static_cast<char>('a' + next_below(26)); }

private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

// Stable named sub-seed so that every stage/sample draws from its own stream
// regardless of evaluation order.
uint64_t derive_seed(uint64_t base, std::string_view name);

} // namespace structeval
