#pragma once

#include "effdim/covering.hpp"
#include "effdim/designs.hpp"
#include "effdim/relu_net.hpp"
#include "effdim/targets.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

namespace effdim {

/// Cell side d^{-1} eps^{1/beta} / 2.
double approx_cell_side(std::size_t d, double beta, double epsilon);

/// Lattice cells (origin 0) whose closed cubes cover the box [lo, hi]^d.
LatticeCover cover_box(std::size_t d, double lo, double hi, double r);

struct Approximator {
  ReluNetwork net = identity_network(1, 1);
  GroupedCover cover;
  double epsilon = 0.0;
  /// Max |x|_inf over the union of the cells.
  double R_S = 0.0;
  double poly_certificate = 0.0;
  int poly_levels = 0;
  NetworkSize size;
  NetworkSize poly_size;
  double build_seconds = 0.0;
};

/// g^mod o g^max o g^sum o [ind_k o filter_k]_k o (identity, window o g^poly_{eps/2}),
/// with g^poly anchored at the cell centers with Taylor data of f0 = f* + 2.
/// Throws RuntimeFailure if the cover has more than max_cells cells.
Approximator build_approximator(const HolderTarget &target, const GroupedCover &cover, double epsilon,
                                std::size_t max_cells = 200000);

/// (|f(x) - Taylor(x)|, d^beta |x - xbar|_inf^beta).
std::pair<double, double> taylor_remainder_check(const HolderTarget &target, const Vector &xbar, const Vector &x);

/// n points of the Halton sequence in the box [lo, hi] (per-coordinate bounds).
Matrix halton_box(const Vector &lo, const Vector &hi, std::size_t n);

struct ApproxCertificate {
  double epsilon = 0.0;
  double tau = 0.0;
  double sup_on_S = 0.0;
  std::size_t sweep_points = 0;
  double l2 = 0.0;
  double l2_stderr = 0.0;
  NetworkSize size;
  std::size_t cells = 0;
  double build_seconds = 0.0;
};

/// Where the sup error is measured: Halton points of the bounding box that
/// pass `inside`, plus the cell centers and corners of `cover`.
struct SweepRegion {
  Vector lo, hi;
  std::function<bool(const Vector &)> inside;
  const LatticeCover *cover = nullptr;
};

/// Sup error on the region and, if n_mc > 0, the MC L2(P) error over the
/// design with its standard error.
ApproxCertificate measure_errors(const ReluNetwork &net, const HolderTarget &target, const DesignSpec &design,
                                 const SweepRegion &region, std::size_t n_sweep, std::size_t n_mc,
                                 std::uint64_t seed);

struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;
  std::vector<double> epsilons;
  std::vector<double> K;
};

/// Least-squares slope of log K against log(1/eps) for approximators built
/// on covers of `support_points` with side approx_cell_side.
ScalingFit size_scaling_probe(const HolderTarget &target, const Matrix &support_points,
                              const std::vector<double> &epsilons);

/// Ordinary least squares y = a + b x; returns (b, a, rms residual).
std::tuple<double, double, double> least_squares(const std::vector<double> &x, const std::vector<double> &y);

} // namespace effdim
