#include "structeval/rng.hpp"

#include <cmath>

namespace structeval {

uint64_t Rng::next_below(uint64_t n) {
  if (n <= 1) return 0;
  const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t v = next_u64();
  while (v >= limit) v = next_u64();
  return v % n;
}

double Rng::next_gaussian() {
  if (spare_) {
    double v = *spare_;
    spare_.reset();
    return v;
  }
  // u1 in (0,1] so the log is finite.
  double u1 = 1.0 - next_double();
  double u2 = next_double();
  double radius = std::sqrt(-2.0 * std::log(u1));
  double angle = 6.283185307179586476925286766559 * u2;
  spare_ = radius * std::sin(angle);
  return radius * std::cos(angle);
}

uint64_t derive_seed(uint64_t base, std::string_view name) {
  // FNV-1a over the name, mixed with the base seed, then finalized with the
  // splitmix64 avalanche so nearby seeds do not produce nearby streams.
  uint64_t h = 14695981039346656037ull ^ (base * 0x9E3779B97F4A7C15ull);
  for (unsigned char c : name) {
    h ^= c;
    h *= 1099511628211ull;
  }
  h ^= h >> 30;
  h *= 0xBF58476D1CE4E5B9ull;
  h ^= h >> 27;
  h *= 0x94D049BB133111EBull;
  h ^= h >> 31;
  return h;
}

} // namespace structeval
