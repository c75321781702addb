#pragma once

#include "effdim/net_blocks.hpp"
#include "effdim/relu_net.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace effdim {

/// Test function f* with closed-form partial derivatives.
///
/// `declared_norm` is an analytic upper bound of the Hoelder norm on the
/// target's domain, computed from per-derivative sup bounds S(alpha):
///   max_{|alpha| < k} S(alpha) + max_{|alpha| = k} (2 S(alpha))^{1-s} (sum_i S(alpha + e_i))^s
/// with k = floor(beta), s = beta - k. Library factories rescale the
/// amplitude so that declared_norm <= 1 and |f| <= 1.
struct HolderTarget {
  std::string name;
  std::size_t d = 1;
  double beta = 1.0;
  std::function<double(const Vector &)> value;
  std::function<double(const MultiIndex &, const Vector &)> partial;
  double declared_norm = 0.0;
  /// Domain is the cube [-domain_radius, domain_radius]^d (infinite if unbounded).
  double domain_radius = 0.0;
  /// Factory parameters, for config echo.
  nlohmann::json params;
};

/// A sin(w . x + phase).
HolderTarget make_trig_target(const Vector &w, double phase, double beta);
/// A exp(-|x - c|^2 / (2 s^2)).
HolderTarget make_bump_target(const Vector &center, double width, double beta);
/// A sum_t coef_t x^{alpha_t} on [-radius, radius]^d.
HolderTarget make_poly_target(std::size_t d, const std::map<MultiIndex, double> &terms,
                              double radius, double beta);
HolderTarget make_constant_target(std::size_t d, double c, double beta);
/// a . x + b with no rescaling; throws ParameterError if the norm on the cube exceeds 1.
HolderTarget make_linear_target(const Vector &a, double b, double radius, double beta);

/// Three library targets (trig, bump, cubic polynomial) for dimension d.
std::vector<HolderTarget> target_library(std::size_t d, double beta);

/// {"family":"trig"|"bump"|"poly"|"constant"|"linear", ...}; unknown keys rejected.
HolderTarget target_from_json(const nlohmann::json &doc, std::size_t d, double beta);

/// Largest sampled Hoelder quotient plus sampled sup of the lower derivatives
/// over random pairs in [lo, hi]^d.
double sampled_holder_norm(const HolderTarget &t, double lo, double hi, std::size_t pairs,
                           std::uint64_t seed);

/// Degree-floor(beta) Taylor polynomial of f around xbar, evaluated at x.
double taylor_value(const HolderTarget &t, const Vector &xbar, const Vector &x);

/// Sup of |He_k(u) exp(-u^2/2)| over the real line (He: probabilists' Hermite).
double hermite_envelope(int k);

} // namespace effdim
