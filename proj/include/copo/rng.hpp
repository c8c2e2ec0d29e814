#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace copo {

// Deterministic draws across platforms: mt19937_64 raw words mapped to
// [0,1) by the top 53 bits. Distribution classes from <random> are not
// bit-portable, so files produced with this generator record the id below.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  static std::string algorithm_id() { return "mt19937_64/canonical53"; }

  // Uniform in [0,1) with 53-bit resolution.
  double canonical() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * canonical(); }

  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
};

}  // namespace copo
