#pragma once

#include "effdim/designs.hpp"
#include "effdim/relu_net.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace effdim {

enum class MleAggregation {
  kMeanOfInverses,  // 1 / mean(1 / m_hat(x)), the default
  kMeanOfEstimates, // mean(m_hat(x))
};

struct MleConfig {
  std::size_t k = 20;
  MleAggregation aggregation = MleAggregation::kMeanOfInverses;
};

MleAggregation aggregation_from_string(const std::string &s);
std::string to_string(MleAggregation a);

/// Per-point m_hat(x) = [ (1/(k-1)) sum_{j<k} log(T_k / T_j) ]^{-1}.
Vector mle_pointwise(const Matrix &points, std::size_t k);

/// kNN maximum-likelihood intrinsic dimension of the rows of `points`.
/// Points at distance zero from a neighbour are jittered deterministically
/// (relative scale 1e-12); throws RuntimeFailure if that does not separate them.
double mle_dimension(const Matrix &points, const MleConfig &cfg);

struct GrowthPoint {
  std::size_t n = 0;
  double median = 0.0, q25 = 0.0, q75 = 0.0;
  std::vector<double> estimates; // one per seed
};

/// Sample seed of replicate s in growth_curve.
std::uint64_t growth_seed(std::uint64_t base_seed, std::size_t s);

/// For each n, median MLE estimate over `seeds` independent samples.
std::vector<GrowthPoint> growth_curve(const DesignSpec &design, const std::vector<std::size_t> &ns,
                                      const MleConfig &cfg, std::size_t seeds, std::uint64_t base_seed);

/// Kendall tau-a of (i, v_i).
double kendall_tau(const std::vector<double> &v);

/// Linear-interpolation quantile of v (q in [0, 1]).
double quantile(std::vector<double> v, double q);

} // namespace effdim
