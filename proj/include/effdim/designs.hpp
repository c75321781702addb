#pragma once

#include "effdim/gaussian_design.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <string>

namespace effdim {

/// Synthetic input distributions.
///   segment: a + t (b - a), t ~ U(0, 1)
///   flat:    uniform on [0,1]^m x {offset} in R^d, optionally rotated
///   cube:    uniform on [lo, hi]^d
///   gaussian: N(0, Sigma) from an EigenProfile
struct DesignSpec {
  enum class Kind { kSegment, kFlat, kCube, kGaussian } kind = Kind::kCube;
  std::size_t d = 1;
  std::size_t m = 1;
  Vector a, b;           // segment end points
  double offset = 0.37;  // flat: value of the unused coordinates
  double lo = 0.0, hi = 1.0;
  std::uint64_t rotate_seed = 0; // flat: 0 means no rotation
  EigenProfile profile;
  /// Intrinsic dimension of the support (d for cube and gaussian).
  std::size_t intrinsic_dim() const;
};

DesignSpec segment_design(const Vector &a, const Vector &b);
DesignSpec flat_design(std::size_t d, std::size_t m, double offset = 0.37, std::uint64_t rotate_seed = 0);
DesignSpec cube_design(std::size_t d, double lo = 0.0, double hi = 1.0);
DesignSpec gaussian_design(const EigenProfile &profile);

/// n x d matrix; row i depends only on (seed, i).
Matrix draw(const DesignSpec &spec, std::size_t n, std::uint64_t seed);

/// {"kind":"segment","a":[..],"b":[..]} | {"kind":"flat","d":..,"m":..,"offset":..,"rotate_seed":..}
/// | {"kind":"cube","d":..,"lo":..,"hi":..} | {"kind":"gaussian","profile":{..}}
DesignSpec design_from_json(const nlohmann::json &doc);
nlohmann::json to_json(const DesignSpec &spec);

} // namespace effdim
