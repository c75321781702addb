#include "effdim/approximator.hpp"

#include "effdim/errors.hpp"
#include "effdim/kernels.hpp"
#include "effdim/net_blocks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace effdim {

namespace {

double factorial_of(const MultiIndex &a) {
  double f = 1.0;
  for (int ai : a) {
    for (int i = 2; i <= ai; ++i) f *= i;
  }
  return f;
}

double radical_inverse(std::uint64_t i, unsigned base) {
  double inv = 1.0 / base, f = inv, v = 0.0;
  while (i > 0) {
    v += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return v;
}

constexpr unsigned kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71};

} // namespace

double approx_cell_side(std::size_t d, double beta, double epsilon) {
  if (!(epsilon > 0.0) || !(beta > 0.0) || d == 0) throw ParameterError("approx_cell_side: bad arguments");
  return std::pow(epsilon, 1.0 / beta) / (2.0 * static_cast<double>(d));
}

LatticeCover cover_box(std::size_t d, double lo, double hi, double r) {
  if (d == 0 || !(lo < hi) || !(r > 0.0)) throw ParameterError("cover_box: bad arguments");
  const auto a = static_cast<std::int64_t>(std::floor(lo / r));
  const auto b = static_cast<std::int64_t>(std::ceil(hi / r)) - 1;
  LatticeCover cover;
  cover.r = r;
  cover.origin = Vector::Zero(static_cast<Eigen::Index>(d));
  CellIndex v(d, a);
  while (true) {
    cover.cells.push_back(v);
    std::size_t i = d;
    while (i > 0) {
      --i;
      if (v[i] < b) {
        ++v[i];
        break;
      }
      v[i] = a;
      if (i == 0) return cover;
    }
  }
}

Approximator build_approximator(const HolderTarget &target, const GroupedCover &cover, double epsilon,
                                std::size_t max_cells) {
  const auto start = std::chrono::steady_clock::now();
  const auto &cells = cover.cover;
  const std::size_t m = cells.size();
  const std::size_t d = cells.dim();
  if (!(epsilon > 0.0)) throw ParameterError("build_approximator: epsilon must be positive");
  if (m == 0) throw ParameterError("build_approximator: empty cover");
  if (target.d != d) throw ShapeError("build_approximator: target and cover dimensions differ");
  if (m > max_cells) {
    throw RuntimeFailure("build_approximator: cover has " + std::to_string(m) + " cells, budget is " +
                         std::to_string(max_cells));
  }
  const double r = cells.r;

  Approximator out;
  out.epsilon = epsilon;
  out.cover = cover;
  TaylorSpec spec;
  spec.beta = target.beta;
  spec.epsilon = epsilon / 2.0;
  const auto alphas = multi_indices(static_cast<int>(d), static_cast<int>(std::floor(target.beta)));
  for (std::size_t k = 0; k < m; ++k) {
    const Vector c = cells.center(k);
    out.R_S = std::max(out.R_S, c.cwiseAbs().maxCoeff() + r / 2.0);
    std::map<MultiIndex, double> coef;
    for (const auto &a : alphas) {
      const double v = target.partial(a, c);
      if (!std::isfinite(v)) {
        throw RuntimeFailure("build_approximator: partial derivative is not finite at cell " + std::to_string(k));
      }
      coef[a] = v / factorial_of(a);
    }
    coef[MultiIndex(d, 0)] += 2.0;
    spec.anchors.push_back(c);
    spec.coefficients.push_back(std::move(coef));
  }
  // Every indicator is supported within r of its center.
  spec.radius = out.R_S + r / 2.0;
  if (spec.radius > target.domain_radius) {
    throw ParameterError("build_approximator: cover leaves the target's domain");
  }
  const PolyNetwork poly = build_poly(spec);
  out.poly_certificate = poly.certificate;
  out.poly_levels = poly.levels;
  out.poly_size = size_of(poly.net);

  const std::vector<ReluNetwork> front_parts{identity_network(static_cast<Eigen::Index>(d), 1),
                                             compose(build_window(m, 0.0, 4.0), poly.net)};
  const ReluNetwork front = parallel(front_parts);

  std::vector<ReluNetwork> gates;
  gates.reserve(m);
  for (std::size_t k = 0; k < m; ++k) {
    gates.push_back(compose(build_indicator({cells.center(k), r}), build_filter(k + 1, d, m)));
  }
  ReluNetwork net = compose(parallel(gates), front);
  gates.clear();
  net = compose(build_group_sum(cover.groups, m), net);
  net = compose(build_max(cover.groups.size()), net);
  net = compose(build_clamp(), net);
  out.net = std::move(net);
  out.size = size_of(out.net);
  out.build_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::pair<double, double> taylor_remainder_check(const HolderTarget &target, const Vector &xbar, const Vector &x) {
  const double rem = std::abs(target.value(x) - taylor_value(target, xbar, x));
  const double h = (x - xbar).cwiseAbs().maxCoeff();
  const double bound = std::pow(static_cast<double>(target.d), target.beta) * std::pow(h, target.beta);
  return {rem, bound};
}

Matrix halton_box(const Vector &lo, const Vector &hi, std::size_t n) {
  const auto d = lo.size();
  if (d > static_cast<Eigen::Index>(std::size(kPrimes))) throw ParameterError("halton_box: dimension too large");
  Matrix pts(d, static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      pts(j, static_cast<Eigen::Index>(i)) =
          lo[j] + (hi[j] - lo[j]) * radical_inverse(i + 1, kPrimes[static_cast<std::size_t>(j)]);
    }
  }
  return pts;
}

ApproxCertificate measure_errors(const ReluNetwork &net, const HolderTarget &target, const DesignSpec &design,
                                 const SweepRegion &region, std::size_t n_sweep, std::size_t n_mc,
                                 std::uint64_t seed) {
  ApproxCertificate cert;
  cert.size = size_of(net);
  const auto d = static_cast<Eigen::Index>(target.d);

  std::vector<Vector> keep;
  const Matrix halton = halton_box(region.lo, region.hi, n_sweep);
  for (Eigen::Index i = 0; i < halton.cols(); ++i) {
    Vector x = halton.col(i);
    if (!region.inside || region.inside(x)) keep.push_back(std::move(x));
  }
  if (region.cover) {
    const auto &c = *region.cover;
    cert.cells = c.size();
    for (std::size_t k = 0; k < c.size(); ++k) {
      const Vector center = c.center(k);
      if (!region.inside || region.inside(center)) keep.push_back(center);
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << d); ++mask) {
        Vector corner = center;
        for (Eigen::Index j = 0; j < d; ++j) corner[j] += ((mask >> j) & 1 ? 0.5 : -0.5) * c.r;
        if (!region.inside || region.inside(corner)) keep.push_back(std::move(corner));
      }
    }
  }
  cert.sweep_points = keep.size();
  if (!keep.empty()) {
    Matrix pts(d, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i) pts.col(static_cast<Eigen::Index>(i)) = keep[i];
    const Matrix y = kernels::evaluate_batch_omp(net, pts);
    double worst = 0.0;
#pragma omp parallel for reduction(max : worst)
    for (Eigen::Index i = 0; i < pts.cols(); ++i) {
      worst = std::max(worst, std::abs(y(0, i) - target.value(pts.col(i))));
    }
    cert.sup_on_S = worst;
  }

  if (n_mc > 0) {
    const Matrix x = draw(design, n_mc, seed).transpose();
    const Matrix y = kernels::evaluate_batch_omp(net, x);
    double sum = 0.0, sum2 = 0.0;
#pragma omp parallel for reduction(+ : sum, sum2)
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
      const double e = y(0, i) - target.value(x.col(i));
      sum += e * e;
      sum2 += e * e * e * e;
    }
    const double n = static_cast<double>(n_mc);
    cert.l2 = sum / n;
    const double var = std::max(0.0, sum2 / n - cert.l2 * cert.l2);
    cert.l2_stderr = std::sqrt(var / std::max(1.0, n - 1.0));
  }
  return cert;
}

std::tuple<double, double, double> least_squares(const std::vector<double> &x, const std::vector<double> &y) {
  if (x.size() != y.size() || x.size() < 2) throw ParameterError("least_squares: need two or more points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw ParameterError("least_squares: degenerate x range");
  const double b = sxy / sxx, a = my - b * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) rss += std::pow(y[i] - a - b * x[i], 2);
  return {b, a, std::sqrt(rss / n)};
}

ScalingFit size_scaling_probe(const HolderTarget &target, const Matrix &support_points,
                              const std::vector<double> &epsilons) {
  if (epsilons.size() < 4) throw ParameterError("size_scaling_probe: need at least 4 epsilons");
  const auto [lo, hi] = std::minmax_element(epsilons.begin(), epsilons.end());
  if (!(*lo > 0.0) || *hi < 4.0 * *lo) throw ParameterError("size_scaling_probe: epsilons must span 4x");
  ScalingFit fit;
  std::vector<double> lx, ly;
  for (double eps : epsilons) {
    const double r = approx_cell_side(target.d, target.beta, eps);
    const auto grouped = group_cells(cover_points(support_points, r));
    const auto approx = build_approximator(target, grouped, eps);
    fit.epsilons.push_back(eps);
    fit.K.push_back(static_cast<double>(approx.size.nonzeros_K));
    lx.push_back(std::log(1.0 / eps));
    ly.push_back(std::log(static_cast<double>(approx.size.nonzeros_K)));
  }
  std::tie(fit.slope, fit.intercept, fit.residual) = least_squares(lx, ly);
  return fit;
}

} // namespace effdim
