#pragma once

#include <cstdint>

namespace effdim {

/// Counter-based random source. Every draw is a pure function of
/// (seed, stream, counter), so results do not depend on how work is split
/// across threads.
///
/// Uniforms come from the splitmix64 finalizer applied to a mixed key and
/// carry 53 random bits in (0, 1). Normals use the cosine branch of
/// Box-Muller on two consecutive uniforms.
class CounterRng {
public:
  constexpr CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
      : seed_(seed), stream_(stream) {}

  std::uint64_t bits(std::uint64_t counter) const noexcept;
  double uniform(std::uint64_t counter) const noexcept;
  double normal(std::uint64_t counter) const noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  /// Independent substream; used to separate e.g. design draws from noise.
  CounterRng substream(std::uint64_t tag) const noexcept;

private:
  std::uint64_t seed_;
  std::uint64_t stream_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

} // namespace effdim
