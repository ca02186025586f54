#pragma once

#include <cstdint>
#include <string_view>

namespace evcoord::common {

/// Deterministic, platform-independent generator (splitmix64). All scenario
/// sampling flows through one seed; substreams keep draws independent of
/// call order elsewhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  Rng substream(std::string_view label) const {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a
    for (const char c : label) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ull;
    }
    return Rng(state_ ^ h);
  }

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  int uniform_int(int a, int b) {  // inclusive ends
    return a + static_cast<int>(next() % static_cast<std::uint64_t>(b - a + 1));
  }

 private:
  std::uint64_t state_;
};

}  // namespace evcoord::common
