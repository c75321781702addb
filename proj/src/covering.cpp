#include "effdim/covering.hpp"

#include "effdim/csv.hpp"
#include "effdim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>

namespace effdim {

namespace {

constexpr double kCeilSlack = 1e-9;

double ceil_slack(double x) { return std::ceil(x - kCeilSlack); }

// Lattice index of every row, then unique cells with counts.
void bin_points(const Matrix &points, double r, std::vector<CellIndex> &cells,
                std::vector<std::size_t> &counts) {
  const auto n = static_cast<std::size_t>(points.rows());
  const auto d = static_cast<std::size_t>(points.cols());
  std::vector<CellIndex> idx(n, CellIndex(d));
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      idx[i][j] = static_cast<std::int64_t>(std::floor(points(static_cast<Eigen::Index>(i),
                                                              static_cast<Eigen::Index>(j)) / r));
    }
  }
  std::sort(idx.begin(), idx.end());
  cells.clear();
  counts.clear();
  for (std::size_t i = 0; i < n; ++i) {
    if (cells.empty() || idx[i] != cells.back()) {
      cells.push_back(idx[i]);
      counts.push_back(0);
    }
    ++counts.back();
  }
}

void check_points(const Matrix &points, double r, const char *who) {
  if (points.rows() == 0 || points.cols() == 0) throw ParameterError(std::string(who) + ": no points");
  if (!(r > 0.0) || !std::isfinite(r)) throw ParameterError(std::string(who) + ": r must be positive");
}

} // namespace

Vector LatticeCover::center(std::size_t k) const {
  Vector c(origin.size());
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    c[i] = origin[i] + r * (static_cast<double>(cells[k][static_cast<std::size_t>(i)]) + 0.5);
  }
  return c;
}

LatticeCover cover_points(const Matrix &points, double r) {
  check_points(points, r, "cover_points");
  LatticeCover cover;
  cover.r = r;
  cover.origin = Vector::Zero(points.cols());
  std::vector<std::size_t> counts;
  bin_points(points, r, cover.cells, counts);
  const double n = static_cast<double>(points.rows());
  for (auto c : counts) cover.mass.push_back(static_cast<double>(c) / n);
  return cover;
}

LatticeCover cover_ellipsoid_set(const EllipsoidSet &set) {
  const auto &lam = set.profile.lambdas;
  const std::size_t d = set.profile.dim();
  const std::size_t p = set.p;
  const double r = set.r, R = set.R;
  if (p > d) throw ParameterError("cover_ellipsoid_set: p exceeds d");
  if (!(r > 0.0) || !(R > 0.0)) throw ParameterError("cover_ellipsoid_set: R and r must be positive");
  for (std::size_t i = 0; i < d; ++i) {
    if (!(lam[static_cast<Eigen::Index>(i)] > 0.0)) throw ParameterError("cover_ellipsoid_set: degenerate lambda");
  }
  if (p > 0 && 2.0 * R * lam[static_cast<Eigen::Index>(p - 1)] < r * (1.0 - kCeilSlack)) {
    throw ParameterError("cover_ellipsoid_set: requires 2 R lambda_p >= r");
  }

  LatticeCover cover;
  cover.r = r;
  cover.origin = Vector::Constant(static_cast<Eigen::Index>(d), -r / 2.0);
  std::vector<std::int64_t> lo(p), hi(p);
  for (std::size_t i = 0; i < p; ++i) {
    const double half = lam[static_cast<Eigen::Index>(i)] * R;
    const auto layers = static_cast<std::int64_t>(ceil_slack(2.0 * half / r));
    const double o = layers % 2 == 1 ? -r / 2.0 : 0.0;
    cover.origin[static_cast<Eigen::Index>(i)] = o;
    lo[i] = static_cast<std::int64_t>(std::floor((-half - o) / r)) - 1;
    hi[i] = static_cast<std::int64_t>(std::floor((half - o) / r)) + 1;
  }

  // Cells that only touch the boundary are dropped; the slack keeps rounding
  // in r = 2 R lambda_i from turning a touching cell into a kept one.
  const double R2 = R * R * (1.0 - kCeilSlack);
  CellIndex v(d, 0);
  // Depth-first over the ellipsoid axes with the partial minimum of the form.
  auto rec = [&](auto &&self, std::size_t i, double partial) -> void {
    if (i == p) {
      cover.cells.push_back(v);
      return;
    }
    const double l = lam[static_cast<Eigen::Index>(i)];
    const double o = cover.origin[static_cast<Eigen::Index>(i)];
    for (std::int64_t k = lo[i]; k <= hi[i]; ++k) {
      const double a = o + r * static_cast<double>(k), b = a + r;
      const double m = (a <= 0.0 && b >= 0.0) ? 0.0 : std::min(a * a, b * b);
      const double q = partial + m / (l * l);
      if (q < R2) {
        v[i] = k;
        self(self, i + 1, q);
      }
    }
  };
  rec(rec, 0, 0.0);
  return cover;
}

double ellipsoid_product_bound(const EllipsoidSet &set) {
  if (set.p == 0) return 1.0;
  const auto &lam = set.profile.lambdas;
  const double lp = lam[static_cast<Eigen::Index>(set.p - 1)];
  double prod = 1.0;
  for (std::size_t i = 0; i < set.p; ++i) prod *= lam[static_cast<Eigen::Index>(i)] / lp;
  return prod;
}

double ellipsoid_box_cells(const EllipsoidSet &set) {
  double prod = 1.0;
  for (std::size_t i = 0; i < set.p; ++i) {
    prod *= ceil_slack(2.0 * set.profile.lambdas[static_cast<Eigen::Index>(i)] * set.R / set.r);
  }
  return prod;
}

GroupedCover group_cells(const LatticeCover &cover) {
  GroupedCover g{cover, {}};
  std::map<std::vector<int>, std::size_t> slot;
  for (std::size_t k = 0; k < cover.cells.size(); ++k) {
    std::vector<int> parity(cover.cells[k].size());
    for (std::size_t i = 0; i < parity.size(); ++i) {
      parity[i] = static_cast<int>(((cover.cells[k][i] % 2) + 2) % 2);
    }
    auto [it, fresh] = slot.try_emplace(parity, g.groups.size());
    if (fresh) g.groups.emplace_back();
    g.groups[it->second].push_back(k);
  }
  return g;
}

double cell_distance(const LatticeCover &cover, std::size_t a, std::size_t b) {
  std::int64_t gap = 0;
  for (std::size_t i = 0; i < cover.dim(); ++i) {
    const std::int64_t diff = std::abs(cover.cells[a][i] - cover.cells[b][i]);
    gap = std::max(gap, diff - 1);
  }
  return cover.r * static_cast<double>(std::max<std::int64_t>(gap, 0));
}

EffDimEstimate estimate_effective_dim(const Matrix &points, double r, double tau) {
  check_points(points, r, "estimate_effective_dim");
  if (!(r < 1.0)) throw DomainError("estimate_effective_dim: p_hat undefined for r >= 1");
  if (!(tau >= 0.0 && tau < 1.0)) throw ParameterError("estimate_effective_dim: tau must lie in [0, 1)");
  std::vector<CellIndex> cells;
  std::vector<std::size_t> counts;
  bin_points(points, r, cells, counts);
  std::vector<std::size_t> order(cells.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return counts[a] > counts[b]; });

  const auto n = static_cast<std::size_t>(points.rows());
  const auto may_drop = static_cast<std::size_t>(std::floor(tau * static_cast<double>(n) * (1.0 + 1e-12)));
  std::size_t kept = 0, used = 0;
  while (used < order.size() && n - kept > may_drop) kept += counts[order[used++]];

  EffDimEstimate e;
  e.r = r;
  e.tau = tau;
  e.n_cells = used;
  e.retained_mass = static_cast<double>(kept) / static_cast<double>(n);
  e.p_hat = std::log(static_cast<double>(used)) / -std::log(r);
  std::vector<std::size_t> chosen(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(used));
  std::sort(chosen.begin(), chosen.end());
  e.retained.r = r;
  e.retained.origin = Vector::Zero(points.cols());
  for (auto k : chosen) {
    e.retained.cells.push_back(cells[k]);
    e.retained.mass.push_back(static_cast<double>(counts[k]) / static_cast<double>(n));
    for (auto v : cells[k]) {
      e.R_S = std::max({e.R_S, std::abs(r * static_cast<double>(v)), std::abs(r * static_cast<double>(v + 1))});
    }
  }
  return e;
}

void write_cover_csv(std::ostream &out, const LatticeCover &cover) {
  std::vector<std::string> header;
  for (std::size_t i = 0; i < cover.dim(); ++i) header.push_back("i" + std::to_string(i));
  header.push_back("mass");
  CsvWriter csv(out, header);
  for (std::size_t k = 0; k < cover.cells.size(); ++k) {
    std::vector<CsvWriter::Cell> row;
    for (auto v : cover.cells[k]) row.emplace_back(static_cast<long long>(v));
    if (cover.mass.empty()) {
      row.emplace_back(std::string());
    } else {
      row.emplace_back(cover.mass[k]);
    }
    csv.row(row);
  }
}

} // namespace effdim
