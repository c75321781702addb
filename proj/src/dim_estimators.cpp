#include "effdim/dim_estimators.hpp"

#include "effdim/errors.hpp"
#include "effdim/kernels.hpp"
#include "effdim/rng.hpp"

#include <algorithm>
#include <cmath>

namespace effdim {

namespace {

constexpr std::size_t kMaxPoints = 200000;

bool has_zero(const Matrix &dist) { return (dist.col(0).array() <= 0.0).any(); }

} // namespace

MleAggregation aggregation_from_string(const std::string &s) {
  if (s == "mean_of_inverses") return MleAggregation::kMeanOfInverses;
  if (s == "mean_of_estimates") return MleAggregation::kMeanOfEstimates;
  throw ParameterError("mle: unknown aggregation \"" + s + "\"");
}

std::string to_string(MleAggregation a) {
  return a == MleAggregation::kMeanOfInverses ? "mean_of_inverses" : "mean_of_estimates";
}

Vector mle_pointwise(const Matrix &points, std::size_t k) {
  if (k < 3) throw ParameterError("mle: k must be at least 3");
  if (static_cast<std::size_t>(points.rows()) <= k) throw ParameterError("mle: need more than k points");
  if (static_cast<std::size_t>(points.rows()) > kMaxPoints) {
    throw ParameterError("mle: kNN is limited to " + std::to_string(kMaxPoints) + " points");
  }
  Matrix dist = kernels::knn_distances_omp(points, k);
  if (has_zero(dist)) {
    const double scale = std::max(points.cwiseAbs().maxCoeff(), 1e-300);
    const CounterRng rng(0x717e, 0);
    Matrix jittered = points;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      for (Eigen::Index j = 0; j < points.cols(); ++j) {
        jittered(i, j) += 1e-12 * scale * (rng.uniform(static_cast<std::uint64_t>(i * points.cols() + j)) - 0.5);
      }
    }
    dist = kernels::knn_distances_omp(jittered, k);
    if (has_zero(dist)) throw RuntimeFailure("mle: duplicate points survive the jitter");
  }
  const auto kk = static_cast<Eigen::Index>(k);
  Vector est(points.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j + 1 < kk; ++j) s += std::log(dist(i, kk - 1) / dist(i, j));
    est[i] = static_cast<double>(k - 1) / s;
  }
  return est;
}

double mle_dimension(const Matrix &points, const MleConfig &cfg) {
  const Vector est = mle_pointwise(points, cfg.k);
  if (cfg.aggregation == MleAggregation::kMeanOfEstimates) return est.mean();
  return 1.0 / est.cwiseInverse().mean();
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw ParameterError("quantile: empty input");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::uint64_t growth_seed(std::uint64_t base_seed, std::size_t s) { return splitmix64(base_seed + s); }

std::vector<GrowthPoint> growth_curve(const DesignSpec &design, const std::vector<std::size_t> &ns,
                                      const MleConfig &cfg, std::size_t seeds, std::uint64_t base_seed) {
  if (seeds == 0) throw ParameterError("growth_curve: need at least one seed");
  for (std::size_t i = 1; i < ns.size(); ++i) {
    if (ns[i] <= ns[i - 1]) throw ParameterError("growth_curve: ns must be increasing");
  }
  std::vector<GrowthPoint> out;
  for (std::size_t n : ns) {
    GrowthPoint g;
    g.n = n;
    for (std::size_t s = 0; s < seeds; ++s) {
      g.estimates.push_back(mle_dimension(draw(design, n, growth_seed(base_seed, s)), cfg));
    }
    g.median = quantile(g.estimates, 0.5);
    g.q25 = quantile(g.estimates, 0.25);
    g.q75 = quantile(g.estimates, 0.75);
    out.push_back(std::move(g));
  }
  return out;
}

double kendall_tau(const std::vector<double> &v) {
  if (v.size() < 2) return 0.0;
  long long score = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t j = i + 1; j < v.size(); ++j) score += (v[j] > v[i]) - (v[j] < v[i]);
  }
  const double pairs = static_cast<double>(v.size() * (v.size() - 1) / 2);
  return static_cast<double>(score) / pairs;
}

} // namespace effdim
