#include "effdim/net_blocks.hpp"

#include "effdim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

namespace effdim {

namespace {

using Trip = Eigen::Triplet<double>;

SparseMatrix sparse(Eigen::Index rows, Eigen::Index cols, const std::vector<Trip> &t) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  m.prune(0.0);
  m.makeCompressed();
  return m;
}

// One level of the pairwise max tree: n inputs -> ceil(n/2) outputs.
ReluNetwork max_level(std::size_t n) {
  const std::size_t pairs = n / 2;
  const bool odd = n % 2 == 1;
  const auto hidden = static_cast<Eigen::Index>(3 * pairs + (odd ? 2 : 0));
  const auto out = static_cast<Eigen::Index>(pairs + (odd ? 1 : 0));
  std::vector<Trip> w1, w2;
  for (std::size_t p = 0; p < pairs; ++p) {
    const auto a = static_cast<Eigen::Index>(2 * p), b = a + 1;
    const auto h = static_cast<Eigen::Index>(3 * p);
    w1.emplace_back(h, a, 1.0);
    w1.emplace_back(h, b, -1.0);
    w1.emplace_back(h + 1, b, 1.0);
    w1.emplace_back(h + 2, b, -1.0);
    const auto o = static_cast<Eigen::Index>(p);
    w2.emplace_back(o, h, 1.0);
    w2.emplace_back(o, h + 1, 1.0);
    w2.emplace_back(o, h + 2, -1.0);
  }
  if (odd) {
    const auto x = static_cast<Eigen::Index>(n - 1);
    const auto h = static_cast<Eigen::Index>(3 * pairs);
    w1.emplace_back(h, x, 1.0);
    w1.emplace_back(h + 1, x, -1.0);
    w2.emplace_back(out - 1, h, 1.0);
    w2.emplace_back(out - 1, h + 1, -1.0);
  }
  return ReluNetwork({{sparse(hidden, static_cast<Eigen::Index>(n), w1), Vector::Zero(hidden)},
                      {sparse(out, hidden, w2), Vector::Zero(out)}});
}

// Squares of linear forms of the input, combined linearly at the output,
// alongside exact carries of selected inputs.
struct SquareJob {
  std::vector<std::pair<Eigen::Index, double>> arg; // linear form of the inputs
  double scale = 1.0;                               // |arg| <= scale
  Eigen::Index output = 0;
  double weight = 1.0;
};

// Builds a (levels + 1)-layer network on n inputs. Output rows are
// [carry..., extra outputs...]; each SquareJob adds weight * scale^2 *
// f_T(|arg| / scale) to its output row, where f_T is the sawtooth
// interpolant of t^2.
ReluNetwork square_stage(Eigen::Index n, const std::vector<Eigen::Index> &carry,
                         const std::vector<SquareJob> &jobs, Eigen::Index extra_outputs,
                         int levels) {
  const auto nc = static_cast<Eigen::Index>(carry.size());
  const auto nj = static_cast<Eigen::Index>(jobs.size());
  const Eigen::Index outputs = nc + extra_outputs;
  std::vector<AffineLayer> layers;

  // Layer 1.
  {
    const Eigen::Index rows = 2 * nc + 4 * nj;
    std::vector<Trip> t;
    Vector b = Vector::Zero(rows);
    for (Eigen::Index c = 0; c < nc; ++c) {
      t.emplace_back(2 * c, carry[c], 1.0);
      t.emplace_back(2 * c + 1, carry[c], -1.0);
    }
    for (Eigen::Index j = 0; j < nj; ++j) {
      const Eigen::Index r = 2 * nc + 4 * j;
      for (const auto &[col, coef] : jobs[j].arg) {
        t.emplace_back(r, col, coef);
        t.emplace_back(r + 1, col, -coef);
        t.emplace_back(r + 2, col, coef);
        t.emplace_back(r + 3, col, -coef);
      }
      b[r + 2] = -jobs[j].scale / 2.0;
      b[r + 3] = -jobs[j].scale / 2.0;
    }
    layers.push_back({sparse(rows, n, t), b});
  }

  // Linear expressions of (acc_{s-1}, g_s) in terms of the current hidden layer.
  using Form = std::vector<std::pair<Eigen::Index, double>>;
  auto acc_form = [&](Eigen::Index j, int s) -> Form {
    if (s == 1) {
      const Eigen::Index r = 2 * nc + 4 * j;
      const double inv = 1.0 / jobs[j].scale;
      return {{r, inv}, {r + 1, inv}};
    }
    return {{2 * nc + 3 * j, 1.0}};
  };
  auto tent_form = [&](Eigen::Index j, int s) -> Form {
    if (s == 1) {
      const Eigen::Index r = 2 * nc + 4 * j;
      const double inv = 1.0 / jobs[j].scale;
      return {{r, 2.0 * inv}, {r + 1, 2.0 * inv}, {r + 2, -4.0 * inv}, {r + 3, -4.0 * inv}};
    }
    const Eigen::Index r = 2 * nc + 3 * j;
    return {{r + 1, 2.0}, {r + 2, -4.0}};
  };

  for (int s = 1; s < levels; ++s) {
    const Eigen::Index cols = layers.back().rows();
    const Eigen::Index rows = 2 * nc + 3 * nj;
    std::vector<Trip> t;
    Vector b = Vector::Zero(rows);
    for (Eigen::Index c = 0; c < nc; ++c) {
      t.emplace_back(2 * c, 2 * c, 1.0);
      t.emplace_back(2 * c, 2 * c + 1, -1.0);
      t.emplace_back(2 * c + 1, 2 * c, -1.0);
      t.emplace_back(2 * c + 1, 2 * c + 1, 1.0);
    }
    const double decay = std::ldexp(1.0, -2 * s);
    for (Eigen::Index j = 0; j < nj; ++j) {
      const Eigen::Index r = 2 * nc + 3 * j;
      for (const auto &[col, coef] : acc_form(j, s)) t.emplace_back(r, col, coef);
      for (const auto &[col, coef] : tent_form(j, s)) {
        t.emplace_back(r, col, -decay * coef);
        t.emplace_back(r + 1, col, coef);
        t.emplace_back(r + 2, col, coef);
      }
      b[r + 2] = -0.5;
    }
    layers.push_back({sparse(rows, cols, t), b});
  }

  {
    const Eigen::Index cols = layers.back().rows();
    std::vector<Trip> t;
    for (Eigen::Index c = 0; c < nc; ++c) {
      t.emplace_back(c, 2 * c, 1.0);
      t.emplace_back(c, 2 * c + 1, -1.0);
    }
    const double decay = std::ldexp(1.0, -2 * levels);
    for (Eigen::Index j = 0; j < nj; ++j) {
      const double w = jobs[j].weight * jobs[j].scale * jobs[j].scale;
      const Eigen::Index o = nc + jobs[j].output;
      for (const auto &[col, coef] : acc_form(j, levels)) t.emplace_back(o, col, w * coef);
      for (const auto &[col, coef] : tent_form(j, levels)) t.emplace_back(o, col, -w * decay * coef);
    }
    layers.push_back({sparse(outputs, cols, t), Vector::Zero(outputs)});
  }
  return ReluNetwork(std::move(layers));
}

// Product jobs a*b = ((a+b)^2 - a^2 - b^2) / 2 for input pairs.
std::vector<SquareJob> product_jobs(const std::vector<std::pair<Eigen::Index, Eigen::Index>> &pairs,
                                    double range) {
  std::vector<SquareJob> jobs;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [a, b] = pairs[p];
    const auto out = static_cast<Eigen::Index>(p);
    if (a == b) {
      jobs.push_back({{{a, 1.0}}, range, out, 1.0});
      continue;
    }
    jobs.push_back({{{a, 1.0}, {b, 1.0}}, 2.0 * range, out, 0.5});
    jobs.push_back({{{a, 1.0}}, range, out, -0.5});
    jobs.push_back({{{b, 1.0}}, range, out, -0.5});
  }
  return jobs;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

int degree_of(const MultiIndex &a) { return std::accumulate(a.begin(), a.end(), 0); }

} // namespace

std::vector<MultiIndex> multi_indices(int d, int degree) {
  std::vector<MultiIndex> out;
  for (int total = 0; total <= degree; ++total) {
    MultiIndex a(static_cast<std::size_t>(d), 0);
    // Enumerate compositions of `total` into d parts.
    auto rec = [&](auto &&self, int pos, int left) -> void {
      if (pos == d - 1) {
        a[static_cast<std::size_t>(pos)] = left;
        out.push_back(a);
        return;
      }
      for (int v = left; v >= 0; --v) {
        a[static_cast<std::size_t>(pos)] = v;
        self(self, pos + 1, left - v);
      }
    };
    if (d > 0) rec(rec, 0, total);
  }
  return out;
}

ReluNetwork build_indicator(const CubeSpec &cube) {
  const double r = cube.side;
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw ParameterError("build_indicator: side must be positive, got " + std::to_string(r));
  }
  const Eigen::Index d = cube.center.size();
  if (d == 0) throw ParameterError("build_indicator: empty center");
  const Eigen::Index hidden = 4 * d + 1;
  std::vector<Trip> t1, t2;
  Vector b1 = Vector::Zero(hidden);
  const double offsets[4] = {r, r / 2.0, -r / 2.0, -r};
  const double slopes[4] = {2.0 / r, -2.0 / r, -2.0 / r, 2.0 / r};
  for (Eigen::Index i = 0; i < d; ++i) {
    for (int q = 0; q < 4; ++q) {
      const Eigen::Index row = 4 * i + q;
      t1.emplace_back(row, i, 1.0);
      b1[row] = -cube.center[i] + offsets[q];
      t2.emplace_back(0, row, slopes[q]);
    }
  }
  t1.emplace_back(4 * d, d, 1.0);
  t2.emplace_back(0, 4 * d, 0.25);
  Vector b2(1);
  b2[0] = -static_cast<double>(d);
  std::vector<Trip> t3{{0, 0, 4.0}};
  return ReluNetwork({{sparse(hidden, d + 1, t1), b1},
                      {sparse(1, hidden, t2), b2},
                      {sparse(1, 1, t3), Vector::Zero(1)}});
}

ReluNetwork build_filter(std::size_t k, std::size_t d, std::size_t m) {
  if (d == 0) throw ParameterError("build_filter: d must be positive");
  if (k < 1 || k > m) {
    throw ParameterError("build_filter: k = " + std::to_string(k) + " outside [1, " +
                         std::to_string(m) + "]");
  }
  const auto dd = static_cast<Eigen::Index>(d);
  std::vector<Trip> t;
  for (Eigen::Index i = 0; i < dd; ++i) t.emplace_back(i, i, 1.0);
  t.emplace_back(dd, dd + static_cast<Eigen::Index>(k) - 1, 1.0);
  return ReluNetwork({{sparse(dd + 1, dd + static_cast<Eigen::Index>(m), t), Vector::Zero(dd + 1)}});
}

ReluNetwork build_max(std::size_t m) {
  if (m == 0) throw ParameterError("build_max: need at least one input");
  if (m == 1) return identity_network(1, 1);
  ReluNetwork net = max_level(m);
  std::size_t n = (m + 1) / 2;
  while (n > 1) {
    net = compose(max_level(n), net);
    n = (n + 1) / 2;
  }
  return net;
}

ReluNetwork build_clamp() {
  auto scalar = [](double w, double b) {
    return AffineLayer{sparse(1, 1, {Trip(0, 0, w)}), Vector::Constant(1, b)};
  };
  return ReluNetwork({scalar(1.0, -1.0), scalar(-1.0, 2.0), scalar(-1.0, 1.0)});
}

ReluNetwork build_identity(std::size_t d, std::size_t depth) {
  return identity_network(static_cast<Eigen::Index>(d), depth);
}

ReluNetwork build_window(std::size_t m, double lo, double hi) {
  if (m == 0 || !(lo < hi)) throw ParameterError("build_window: need m >= 1 and lo < hi");
  const auto mm = static_cast<Eigen::Index>(m);
  std::vector<Trip> t1, t2;
  Vector b1(2 * mm);
  for (Eigen::Index k = 0; k < mm; ++k) {
    t1.emplace_back(2 * k, k, 1.0);
    t1.emplace_back(2 * k + 1, k, 1.0);
    b1[2 * k] = -lo;
    b1[2 * k + 1] = -hi;
    t2.emplace_back(k, 2 * k, 1.0);
    t2.emplace_back(k, 2 * k + 1, -1.0);
  }
  return ReluNetwork({{sparse(2 * mm, mm, t1), b1}, {sparse(mm, 2 * mm, t2), Vector::Constant(mm, lo)}});
}

double square_error_bound(int levels) { return std::ldexp(1.0, -2 * levels - 2); }

MultGadget build_mult(int levels, double range) {
  if (levels < 1) throw ParameterError("build_mult: levels must be >= 1");
  if (!(range > 0.0)) throw ParameterError("build_mult: range must be positive");
  auto jobs = product_jobs({{0, 1}}, range);
  MultGadget g{square_stage(2, {}, jobs, 1, levels), 0.0, levels, range};
  g.certificate = kMultConstant * range * range * square_error_bound(levels);
  return g;
}

PolyNetwork build_poly(const TaylorSpec &spec) {
  if (!(spec.epsilon > 0.0)) throw ParameterError("build_poly: epsilon must be positive");
  if (!(spec.radius > 0.0)) throw ParameterError("build_poly: radius must be positive");
  if (!(spec.beta > 0.0)) throw ParameterError("build_poly: beta must be positive");
  if (spec.anchors.empty()) throw ParameterError("build_poly: need at least one anchor");
  if (spec.coefficients.size() != spec.anchors.size()) {
    throw ParameterError("build_poly: one coefficient map per anchor required");
  }
  const Eigen::Index d = spec.anchors.front().size();
  const auto m = static_cast<Eigen::Index>(spec.anchors.size());
  const int degree = static_cast<int>(std::floor(spec.beta));
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto &x = spec.anchors[static_cast<std::size_t>(k)];
    if (x.size() != d) throw ShapeError("build_poly: anchors differ in dimension");
    if (x.cwiseAbs().maxCoeff() > spec.radius) {
      throw ParameterError("build_poly: anchor " + std::to_string(k) + " lies outside the box");
    }
    for (const auto &[alpha, c] : spec.coefficients[static_cast<std::size_t>(k)]) {
      if (static_cast<Eigen::Index>(alpha.size()) != d || degree_of(alpha) > degree ||
          std::any_of(alpha.begin(), alpha.end(), [](int a) { return a < 0; })) {
        throw ParameterError("build_poly: coefficient multi-index out of range");
      }
    }
  }

  PolyNetwork out{identity_network(1, 1), 0.0, 0, degree, 0};
  auto coef = [&](Eigen::Index k, const MultiIndex &a) {
    const auto &mp = spec.coefficients[static_cast<std::size_t>(k)];
    const auto it = mp.find(a);
    return it == mp.end() ? 0.0 : it->second;
  };

  if (degree <= 1) {
    std::vector<Trip> t;
    Vector b(m);
    for (Eigen::Index k = 0; k < m; ++k) {
      const auto &x = spec.anchors[static_cast<std::size_t>(k)];
      b[k] = coef(k, MultiIndex(static_cast<std::size_t>(d), 0));
      if (degree == 1) {
        for (Eigen::Index i = 0; i < d; ++i) {
          MultiIndex e(static_cast<std::size_t>(d), 0);
          e[static_cast<std::size_t>(i)] = 1;
          const double c = coef(k, e);
          t.emplace_back(k, i, c);
          b[k] -= c * x[i];
        }
      }
    }
    out.net = ReluNetwork({{sparse(m, d, t), b}});
    out.monomials = degree == 1 ? static_cast<std::size_t>(d) : 0;
    return out;
  }

  // Monomial basis in u = x / radius. basis[0] is the constant.
  const auto basis = multi_indices(static_cast<int>(d), degree);
  std::map<MultiIndex, std::size_t> where;
  for (std::size_t q = 0; q < basis.size(); ++q) where[basis[q]] = q;

  // a[k][gamma] = sum_{alpha >= gamma} c_{k,alpha} prod_i C(alpha_i, gamma_i)
  //               radius^{gamma_i} (-x_{k,i})^{alpha_i - gamma_i}
  std::vector<std::vector<double>> expanded(static_cast<std::size_t>(m),
                                            std::vector<double>(basis.size(), 0.0));
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto &x = spec.anchors[static_cast<std::size_t>(k)];
    for (const auto &[alpha, c] : spec.coefficients[static_cast<std::size_t>(k)]) {
      if (c == 0.0) continue;
      for (std::size_t q = 0; q < basis.size(); ++q) {
        const auto &g = basis[q];
        double term = c;
        for (Eigen::Index i = 0; i < d && term != 0.0; ++i) {
          const int ai = alpha[static_cast<std::size_t>(i)];
          const int gi = g[static_cast<std::size_t>(i)];
          if (gi > ai) {
            term = 0.0;
            break;
          }
          term *= binomial(ai, gi) * std::pow(spec.radius, gi) * std::pow(-x[i], ai - gi);
        }
        expanded[static_cast<std::size_t>(k)][q] += term;
      }
    }
  }

  // Gadget inputs are true monomials in [-1, 1] plus accumulated error; the
  // margin keeps them inside the gadget range.
  constexpr double kMargin = 0.25;
  constexpr double kRange = 1.0 + kMargin;
  double weighted = 0.0; // max_k sum_gamma |a_{k,gamma}| (|gamma| - 1)
  for (const auto &row : expanded) {
    double w = 0.0;
    for (std::size_t q = 0; q < basis.size(); ++q) {
      const int deg = degree_of(basis[q]);
      if (deg >= 2) w += std::abs(row[q]) * (deg - 1);
    }
    weighted = std::max(weighted, w);
  }
  int levels = 1;
  auto unit_error = [&](int T) { return kMultConstant * kRange * kRange * square_error_bound(T); };
  while ((weighted * unit_error(levels) > spec.epsilon || (degree - 1) * unit_error(levels) > kMargin) &&
         levels < 40) {
    ++levels;
  }
  if (weighted * unit_error(levels) > spec.epsilon) {
    throw RuntimeFailure("build_poly: cannot meet epsilon with double precision gadgets");
  }

  // Clamp stage: u_i = clamp(x_i / radius, -1, 1).
  ReluNetwork net = [&] {
    std::vector<Trip> t1, t2;
    Vector b1(2 * d), b2 = Vector::Constant(d, -1.0);
    for (Eigen::Index i = 0; i < d; ++i) {
      t1.emplace_back(2 * i, i, 1.0 / spec.radius);
      t1.emplace_back(2 * i + 1, i, 1.0 / spec.radius);
      b1[2 * i] = 1.0;
      b1[2 * i + 1] = -1.0;
      t2.emplace_back(i, 2 * i, 1.0);
      t2.emplace_back(i, 2 * i + 1, -1.0);
    }
    return ReluNetwork({{sparse(2 * d, d, t1), b1}, {sparse(d, 2 * d, t2), b2}});
  }();

  // Current output ordering of the network (indices into `basis`).
  std::vector<std::size_t> have;
  for (std::size_t q = 0; q < basis.size(); ++q) {
    if (degree_of(basis[q]) == 1) have.push_back(q);
  }
  for (int s = 1; s < degree; ++s) {
    std::map<std::size_t, Eigen::Index> pos;
    for (std::size_t i = 0; i < have.size(); ++i) pos[have[i]] = static_cast<Eigen::Index>(i);
    std::vector<Eigen::Index> carry(have.size());
    std::iota(carry.begin(), carry.end(), 0);
    std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
    std::vector<std::size_t> made;
    for (std::size_t q = 0; q < basis.size(); ++q) {
      if (degree_of(basis[q]) != s + 1) continue;
      MultiIndex lower = basis[q];
      std::size_t i = 0;
      while (lower[i] == 0) ++i;
      lower[i] -= 1;
      MultiIndex unit(static_cast<std::size_t>(d), 0);
      unit[i] = 1;
      pairs.emplace_back(pos.at(where.at(lower)), pos.at(where.at(unit)));
      made.push_back(q);
    }
    auto jobs = product_jobs(pairs, kRange);
    ReluNetwork stage = square_stage(static_cast<Eigen::Index>(have.size()), carry, jobs,
                                     static_cast<Eigen::Index>(pairs.size()), levels);
    net = compose(stage, net);
    have.insert(have.end(), made.begin(), made.end());
  }

  // Coefficient layer.
  {
    std::vector<Trip> t;
    Vector b(m);
    for (Eigen::Index k = 0; k < m; ++k) {
      const auto &row = expanded[static_cast<std::size_t>(k)];
      b[k] = row[0];
      for (std::size_t i = 0; i < have.size(); ++i) {
        t.emplace_back(k, static_cast<Eigen::Index>(i), row[have[i]]);
      }
    }
    ReluNetwork head({{sparse(m, static_cast<Eigen::Index>(have.size()), t), b}});
    net = compose(head, net);
  }
  out.net = std::move(net);
  out.certificate = weighted * unit_error(levels);
  out.levels = levels;
  out.monomials = have.size();
  return out;
}

ReluNetwork build_group_sum(const std::vector<std::vector<std::size_t>> &groups, std::size_t m) {
  if (groups.empty() || m == 0) throw ParameterError("build_group_sum: empty partition");
  std::vector<int> seen(m, 0);
  std::vector<Trip> t;
  for (std::size_t j = 0; j < groups.size(); ++j) {
    for (std::size_t k : groups[j]) {
      if (k >= m) throw ParameterError("build_group_sum: index " + std::to_string(k) + " out of range");
      if (seen[k]++) throw ParameterError("build_group_sum: index " + std::to_string(k) + " appears twice");
      t.emplace_back(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k), 1.0);
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw ParameterError("build_group_sum: groups do not cover every input");
  }
  const auto J = static_cast<Eigen::Index>(groups.size());
  return ReluNetwork({{sparse(J, static_cast<Eigen::Index>(m), t), Vector::Zero(J)}});
}

} // namespace effdim
