#include "effdim/rng.hpp"

#include <cmath>
#include <numbers>

namespace effdim {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t CounterRng::bits(std::uint64_t counter) const noexcept {
  const std::uint64_t key = splitmix64(seed_ ^ splitmix64(stream_ + 0x632be59bd9b4e019ULL));
  return splitmix64(key ^ splitmix64(counter));
}

double CounterRng::uniform(std::uint64_t counter) const noexcept {
  // 53 bits mapped to the open interval (0, 1).
  const std::uint64_t b = bits(counter) >> 11;
  return (static_cast<double>(b) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t counter) const noexcept {
  const double u1 = uniform(2 * counter);
  const double u2 = uniform(2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

CounterRng CounterRng::substream(std::uint64_t tag) const noexcept {
  return CounterRng(seed_, splitmix64(stream_ * 0x9e3779b97f4a7c15ULL + tag + 1));
}

} // namespace effdim
