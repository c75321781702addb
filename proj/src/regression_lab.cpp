#include "effdim/regression_lab.hpp"

#include "effdim/approximator.hpp"
#include "effdim/dim_estimators.hpp"
#include "effdim/errors.hpp"
#include "effdim/kernels.hpp"
#include "effdim/net_blocks.hpp"
#include "effdim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace effdim {

namespace {

constexpr std::size_t kParamCap = 100000;

struct Dense {
  std::vector<Matrix> W;
  std::vector<Vector> b;
};

Dense init_dense(std::size_t d, const TrainConfig &cfg) {
  const CounterRng rng(cfg.seed, 0x1417);
  Dense net;
  std::uint64_t c = 0;
  for (std::size_t l = 0; l < cfg.depth; ++l) {
    const auto in = static_cast<Eigen::Index>(l == 0 ? d : cfg.width);
    const auto out = static_cast<Eigen::Index>(l + 1 == cfg.depth ? 1 : cfg.width);
    const double scale = std::sqrt(2.0 / static_cast<double>(in));
    Matrix w(out, in);
    for (Eigen::Index i = 0; i < out; ++i) {
      for (Eigen::Index j = 0; j < in; ++j) w(i, j) = scale * rng.normal(c++);
    }
    net.W.push_back(std::move(w));
    net.b.push_back(Vector::Zero(out));
  }
  return net;
}

} // namespace

Dataset generate(const RegressionTask &task) {
  Dataset data;
  data.x = draw(task.design, task.n, task.seed);
  data.y.resize(static_cast<Eigen::Index>(task.n));
  const CounterRng noise = CounterRng(task.seed, 0x0e15).substream(1);
  for (Eigen::Index i = 0; i < data.y.size(); ++i) {
    data.y[i] = task.target.value(data.x.row(i).transpose());
    if (task.sigma > 0.0) data.y[i] += task.sigma * noise.normal(static_cast<std::uint64_t>(i));
  }
  return data;
}

std::size_t dense_params(std::size_t d, std::size_t width, std::size_t depth) {
  if (depth == 1) return d + 1;
  return (d + 1) * width + (depth - 2) * (width + 1) * width + width + 1;
}

FitResult fit_surrogate(const Dataset &data, const TrainConfig &cfg) {
  const auto n = static_cast<std::size_t>(data.x.rows());
  const auto d = static_cast<std::size_t>(data.x.cols());
  if (n == 0) throw ParameterError("fit_surrogate: empty dataset");
  if (cfg.depth < 1 || cfg.width < 1 || cfg.batch < 1) throw ParameterError("fit_surrogate: bad architecture");
  Dense net = init_dense(d, cfg);
  const std::size_t L = cfg.depth;
  const Matrix xt = data.x.transpose();
  const CounterRng shuffle(cfg.seed, 0x5f1e);
  std::vector<std::size_t> order(n);
  std::vector<Matrix> act(L + 1), pre(L);
  double best = std::numeric_limits<double>::infinity();
  std::size_t stale = 0, epoch = 0;

  for (; epoch < cfg.max_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = n; i > 1; --i) {
      const auto j = static_cast<std::size_t>(shuffle.bits(epoch * n + i) % i);
      std::swap(order[i - 1], order[j]);
    }
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += cfg.batch) {
      const std::size_t B = std::min(cfg.batch, n - start);
      act[0].resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(B));
      Vector yb(static_cast<Eigen::Index>(B));
      for (std::size_t j = 0; j < B; ++j) {
        act[0].col(static_cast<Eigen::Index>(j)) = xt.col(static_cast<Eigen::Index>(order[start + j]));
        yb[static_cast<Eigen::Index>(j)] = data.y[static_cast<Eigen::Index>(order[start + j])];
      }
      for (std::size_t l = 0; l < L; ++l) {
        pre[l] = net.W[l] * act[l];
        pre[l].colwise() += net.b[l];
        act[l + 1] = l + 1 < L ? Matrix(pre[l].cwiseMax(0.0)) : pre[l];
      }
      const Vector resid = act[L].row(0).transpose() - yb;
      epoch_loss += resid.squaredNorm();
      Matrix delta = resid.transpose() / static_cast<double>(B);
      for (std::size_t l = L; l-- > 0;) {
        const Matrix gw = delta * act[l].transpose();
        const Vector gb = delta.rowwise().sum();
        if (l > 0) {
          delta = (net.W[l].transpose() * delta).cwiseProduct((pre[l - 1].array() > 0.0).cast<double>().matrix());
        }
        net.W[l] -= cfg.learning_rate * gw;
        net.b[l] -= cfg.learning_rate * gb;
      }
    }
    epoch_loss /= static_cast<double>(n);
    if (!std::isfinite(epoch_loss)) {
      throw RuntimeFailure("fit_surrogate: loss diverged at epoch " + std::to_string(epoch) +
                           " (learning rate " + std::to_string(cfg.learning_rate) + ", width " +
                           std::to_string(cfg.width) + ")");
    }
    if (epoch_loss < best * (1.0 - cfg.tol)) {
      best = epoch_loss;
      stale = 0;
    } else if (++stale >= cfg.patience) {
      ++epoch;
      break;
    }
  }

  std::vector<AffineLayer> layers;
  for (std::size_t l = 0; l < L; ++l) {
    Vector bias = net.b[l];
    if (l + 1 == L) bias.array() += 2.0;
    layers.push_back(make_layer(net.W[l], bias));
  }
  FitResult fit;
  fit.net = compose(build_clamp(), ReluNetwork(std::move(layers)));
  fit.params = dense_params(d, cfg.width, cfg.depth);
  fit.epochs = epoch;
  const Matrix pred = kernels::evaluate_batch_serial(fit.net, xt);
  fit.train_loss = (pred.row(0).transpose() - data.y).squaredNorm() / static_cast<double>(n);
  return fit;
}

std::pair<double, double> risk(const ReluNetwork &net, const HolderTarget &target, const DesignSpec &design,
                               std::size_t n_mc, std::uint64_t seed) {
  if (n_mc < 2) throw ParameterError("risk: need at least two MC draws");
  const Matrix x = draw(design, n_mc, seed).transpose();
  const Matrix y = kernels::evaluate_batch_serial(net, x);
  Vector e2(x.cols());
  for (Eigen::Index i = 0; i < x.cols(); ++i) e2[i] = std::pow(y(0, i) - target.value(x.col(i)), 2);
  const double mean = e2.mean();
  const double var = (e2.array() - mean).square().sum() / static_cast<double>(n_mc - 1);
  return {mean, std::sqrt(var / static_cast<double>(n_mc))};
}

RateFit rate_experiment(const HolderTarget &target, const DesignSpec &design, double sigma, const RateConfig &cfg) {
  if (cfg.ns.size() < 4) throw ParameterError("rate_experiment: need at least 4 sample sizes");
  const auto [lo, hi] = std::minmax_element(cfg.ns.begin(), cfg.ns.end());
  if (*hi < 8 * *lo) throw ParameterError("rate_experiment: ns must span at least 8x");
  if (cfg.replications < 3) throw ParameterError("rate_experiment: need at least 3 replications");

  const double beta = target.beta;
  const double p = static_cast<double>(cfg.p_hypothesis);
  const std::size_t jobs = cfg.ns.size() * cfg.replications;
  RateFit fit;
  fit.runs.resize(jobs);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t j = 0; j < jobs; ++j) {
    const std::size_t n = cfg.ns[j / cfg.replications];
    const std::uint64_t seed = splitmix64(cfg.seed * 1000003ULL + j);
    TrainConfig tc = cfg.train;
    tc.seed = seed;
    const double budget = std::min<double>(kParamCap, cfg.param_scale * std::pow(static_cast<double>(n), p / (2.0 * beta + p)));
    tc.width = 2;
    while (dense_params(design.d, tc.width + 1, tc.depth) <= budget) ++tc.width;
    const Dataset data = generate({target, design, sigma, n, seed});
    const FitResult f = fit_surrogate(data, tc);
    const auto [rk, se] = risk(f.net, target, design, cfg.n_mc, splitmix64(seed ^ 0x9e37));
    fit.runs[j] = {n, seed, rk, se, f.train_loss, f.params};
  }

  auto slope_of = [&](const std::vector<std::vector<double>> &per_n) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < cfg.ns.size(); ++i) {
      lx.push_back(std::log(static_cast<double>(cfg.ns[i])));
      ly.push_back(std::log(quantile(per_n[i], 0.5)));
    }
    return std::get<0>(least_squares(lx, ly));
  };
  std::vector<std::vector<double>> per_n(cfg.ns.size());
  for (std::size_t j = 0; j < jobs; ++j) per_n[j / cfg.replications].push_back(fit.runs[j].risk);
  for (std::size_t i = 0; i < cfg.ns.size(); ++i) fit.medians.emplace_back(cfg.ns[i], quantile(per_n[i], 0.5));
  fit.slope = slope_of(per_n);

  const CounterRng boot(cfg.seed, 0xb007);
  std::vector<double> slopes;
  std::uint64_t c = 0;
  for (std::size_t b = 0; b < cfg.bootstrap; ++b) {
    std::vector<std::vector<double>> re(cfg.ns.size());
    for (std::size_t i = 0; i < cfg.ns.size(); ++i) {
      for (std::size_t r = 0; r < cfg.replications; ++r) re[i].push_back(per_n[i][boot.bits(c++) % cfg.replications]);
    }
    slopes.push_back(slope_of(re));
  }
  if (!slopes.empty()) {
    fit.ci_lo = quantile(slopes, 0.025);
    fit.ci_hi = quantile(slopes, 0.975);
  }
  fit.predicted["intrinsic"] = -2.0 * beta / (2.0 * beta + static_cast<double>(design.intrinsic_dim()));
  fit.predicted["ambient"] = -2.0 * beta / (2.0 * beta + static_cast<double>(design.d));
  fit.predicted["hypothesis"] = -2.0 * beta / (2.0 * beta + p);
  return fit;
}

} // namespace effdim
