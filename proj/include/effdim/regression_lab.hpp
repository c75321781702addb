#pragma once

#include "effdim/designs.hpp"
#include "effdim/relu_net.hpp"
#include "effdim/targets.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace effdim {

struct RegressionTask {
  HolderTarget target;
  DesignSpec design;
  double sigma = 0.0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
};

struct Dataset {
  Matrix x; // n x d
  Vector y;
};

/// y_i = f*(x_i) + sigma xi_i with Gaussian xi; x and xi use separate substreams.
Dataset generate(const RegressionTask &task);

struct TrainConfig {
  std::size_t width = 32;
  std::size_t depth = 3; // affine layers
  std::size_t batch = 32;
  double learning_rate = 0.01;
  std::size_t max_epochs = 3000;
  std::size_t patience = 100; // epochs without relative improvement tol
  double tol = 0.0;
  std::uint64_t seed = 1;
};

struct FitResult {
  ReluNetwork net = identity_network(1, 1); // clamped through g^mod
  double train_loss = 0.0;                  // mean squared error of the clamped net
  std::size_t params = 0;
  std::size_t epochs = 0;
};

/// Dense ReLU network trained by plain mini-batch gradient descent on the
/// squared loss, then clamped to [-1, 1] with g^mod(o + 2).
FitResult fit_surrogate(const Dataset &data, const TrainConfig &cfg);

/// Parameter count of a dense net with the given input dim, width and depth.
std::size_t dense_params(std::size_t d, std::size_t width, std::size_t depth);

/// MC estimate of E (f(X) - f*(X))^2 with its standard error.
std::pair<double, double> risk(const ReluNetwork &net, const HolderTarget &target, const DesignSpec &design,
                               std::size_t n_mc, std::uint64_t seed);

struct RateConfig {
  std::vector<std::size_t> ns;
  std::size_t replications = 3;
  TrainConfig train;
  /// Parameter budget K(n) = param_scale n^{p/(2 beta + p)}, capped at 1e5.
  double param_scale = 40.0;
  std::size_t p_hypothesis = 1;
  std::size_t n_mc = 20000;
  std::size_t bootstrap = 1000;
  std::uint64_t seed = 1;
};

struct RateRun {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double risk = 0.0, stderr_ = 0.0, train_loss = 0.0;
  std::size_t params = 0;
};

struct RateFit {
  std::vector<RateRun> runs;
  std::vector<std::pair<std::size_t, double>> medians;
  double slope = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;
  std::map<std::string, double> predicted;
};

/// Median risk over replications for every n, log-log slope, percentile
/// bootstrap CI over replications, and the exponents -2b/(2b+p) for the
/// intrinsic and ambient dimensions.
RateFit rate_experiment(const HolderTarget &target, const DesignSpec &design, double sigma, const RateConfig &cfg);

} // namespace effdim
