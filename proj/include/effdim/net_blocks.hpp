#pragma once

#include "effdim/relu_net.hpp"

#include <cstddef>
#include <map>
#include <vector>

namespace effdim {

/// Closed cube {x : |x_i - center_i| <= side / 2}.
struct CubeSpec {
  Vector center;
  double side = 1.0;
};

/// Multi-index alpha = (alpha_1, ..., alpha_d).
using MultiIndex = std::vector<int>;

/// All multi-indices of dimension d with |alpha|_1 <= degree, ordered by
/// total degree and then lexicographically (descending in the first entry).
std::vector<MultiIndex> multi_indices(int d, int degree);

/// Anchored Taylor data for the multi-output polynomial network.
///   output_k(x) ~ sum_alpha coefficients[k][alpha] (x - anchors[k])^alpha
/// The approximation is controlled on the box [-radius, radius]^d.
struct TaylorSpec {
  std::vector<Vector> anchors;
  std::vector<std::map<MultiIndex, double>> coefficients;
  double beta = 1.0;
  double epsilon = 0.1;
  double radius = 1.0;
};

/// g_I^{ind,r}: input (x, y) in R^{d+1},
///   4 relu(sum_i ramp_i(x_i) + y / 4 - d),
/// where ramp_i is 1 on |x_i - center_i| <= r/2, 0 beyond r and linear in
/// between. Three affine layers; B <= max{4, d, |center|_inf + r, 2 / r}.
ReluNetwork build_indicator(const CubeSpec &cube);

/// Selects (z_1, ..., z_d, z_{d+k}) from z in R^{d+m}; k is 1-based.
ReluNetwork build_filter(std::size_t k, std::size_t d, std::size_t m);

/// Exact maximum of m inputs, pairwise max(a, b) = relu(a - b) + relu(b) - relu(-b)
/// in a balanced tree. Depth ceil(log2 m) + 1.
ReluNetwork build_max(std::size_t m);

/// g^mod(z) = min(max(1, z), 3) - 2 realized as (-z + 1) o relu(-z + 2) o relu(z - 1).
ReluNetwork build_clamp();

/// Exact identity on R^d with `depth` affine layers (see identity_network).
ReluNetwork build_identity(std::size_t d, std::size_t depth);

/// min(max(lo, y_k), hi) for each of m inputs: two affine layers.
ReluNetwork build_window(std::size_t m, double lo, double hi);

/// Approximate product (a, b) -> a b on [-M, M]^2 together with a sup-error
/// certificate.
struct MultGadget {
  ReluNetwork net;
  double certificate = 0.0;
  int levels = 0;
  double range = 0.0;
};

/// Sup error constant of the product gadget: error <= kMultConstant M^2 4^{-T-1}.
inline constexpr double kMultConstant = 3.0;

/// Product via ab = ((a+b)^2 - a^2 - b^2)/2 with each square formed from T
/// sawtooth levels. Depth T + 1.
MultGadget build_mult(int levels, double range);

/// Sup error of the T-level square on [0, 1]: 4^{-T-1}.
double square_error_bound(int levels);

/// Multi-output Taylor network plus its error accounting.
struct PolyNetwork {
  ReluNetwork net;
  /// Proven sup error over the box for the worst output.
  double certificate = 0.0;
  int levels = 0;
  int degree = 0;
  /// Number of shared monomials of degree >= 1.
  std::size_t monomials = 0;
};

/// Builds the m-output network for `spec`. Degree floor(beta) (integer beta
/// included). Degree 0 and 1 are exact affine maps. For higher degree the
/// input is clamped to the box, scaled to u = x / radius, shared monomials
/// u^gamma are formed by chained product gadgets and a final linear layer
/// expands each anchored polynomial in that basis. The gadget depth T is the
/// smallest for which the coefficient-weighted error stays below epsilon.
PolyNetwork build_poly(const TaylorSpec &spec);

/// out_j = sum_{k in groups[j]} in_k. `groups` must partition {0, ..., m-1}.
ReluNetwork build_group_sum(const std::vector<std::vector<std::size_t>> &groups, std::size_t m);

} // namespace effdim
