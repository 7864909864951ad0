#include "logb/rng.hpp"

#include <cmath>
#include <numbers>

namespace logbandit {

namespace {
std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace

CounterRng::result_type CounterRng::draw(std::uint64_t n) const {
  const std::uint64_t base = mix(key_ ^ mix(stream_ + 0x9e3779b97f4a7c15ULL));
  return mix(base + (n + 1) * 0x9e3779b97f4a7c15ULL);
}

std::size_t CounterRng::below(std::size_t n) {
  // Lemire-style rejection keeps the draw unbiased.
  const std::uint64_t bound = n;
  const std::uint64_t limit = max() - max() % bound;
  std::uint64_t v;
  do {
    v = (*this)();
  } while (v >= limit);
  return static_cast<std::size_t>(v % bound);
}

double CounterRng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace logbandit
