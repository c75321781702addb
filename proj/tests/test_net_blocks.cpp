#include "support.hpp"

#include "effdim/errors.hpp"
#include "effdim/net_blocks.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace effdim;
using effdim::testing::Draws;

namespace {

Vector xy(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double e : v) out[i++] = e;
  return out;
}

double poly_value(const std::map<MultiIndex, double> &c, const Vector &anchor, const Vector &x) {
  double s = 0.0;
  for (const auto &[alpha, coef] : c) {
    double term = coef;
    for (std::size_t j = 0; j < alpha.size(); ++j) term *= std::pow(x[j] - anchor[j], alpha[j]);
    s += term;
  }
  return s;
}

} // namespace

TEST_CASE("indicator: hand-evaluated points") {
  const auto g = build_indicator({Vector::Constant(1, 0.5), 1.0});
  CHECK(evaluate(g, xy({0.5, 2.0}))[0] == 2.0);
  CHECK(evaluate(g, xy({2.0, 3.0}))[0] == 0.0);
  // ramp is 1/2 at 3r/4 from the center: 4 relu(1/2 + 1/2 - 1) = 0
  CHECK(evaluate(g, xy({1.25, 2.0}))[0] == 0.0);
}

TEST_CASE("indicator: trichotomy and nonnegativity") {
  Draws g(4);
  for (std::size_t d : {1u, 2u, 3u}) {
    const CubeSpec cube{g.vector(static_cast<Eigen::Index>(d), -1.0, 1.0), g.uniform(0.05, 0.5)};
    const auto net = build_indicator(cube);
    for (int i = 0; i < 20000; ++i) {
      Vector in(static_cast<Eigen::Index>(d + 1));
      in.head(static_cast<Eigen::Index>(d)) =
          cube.center + g.vector(static_cast<Eigen::Index>(d), -1.2 * cube.side, 1.2 * cube.side);
      const double y = g.uniform(0.0, 4.0);
      in[static_cast<Eigen::Index>(d)] = y;
      const double dist = (in.head(static_cast<Eigen::Index>(d)) - cube.center).cwiseAbs().maxCoeff();
      const double v = evaluate(net, in)[0];
      CHECK(v >= 0.0);
      if (dist <= cube.side / 2) CHECK(std::abs(v - y) <= 1e-10);
      else if (dist <= cube.side) CHECK(v <= y + 1e-10);
      else CHECK(std::abs(v) <= 1e-10);
    }
  }
}

TEST_CASE("indicator: size accounting") {
  for (std::size_t d = 1; d <= 6; ++d) {
    const CubeSpec cube{Vector::Constant(static_cast<Eigen::Index>(d), 0.3), 0.2};
    const auto s = size_of(build_indicator(cube));
    CHECK(s.depth_L == 3);
    CHECK(s.nonzeros_K == 12 * d + 4);
    CHECK(s.max_weight_B <= std::max({4.0, static_cast<double>(d), 0.3 + 0.2, 2.0 / 0.2}));
  }
  CHECK_THROWS_AS(build_indicator({Vector::Zero(2), 0.0}), ParameterError);
}

TEST_CASE("filter selects the requested coordinate") {
  const auto f = build_filter(2, 2, 3);
  const Vector out = evaluate(f, xy({1, 2, 10, 20, 30}));
  CHECK(out == xy({1, 2, 20}));
  CHECK(size_of(f).nonzeros_K == 3);
  CHECK_THROWS_AS(build_filter(0, 2, 3), ParameterError);
  CHECK_THROWS_AS(build_filter(4, 2, 3), ParameterError);

  // filter after (identity, polynomial outputs) picks polynomial output k
  TaylorSpec spec;
  spec.beta = 1.0;
  spec.radius = 1.0;
  for (int k = 0; k < 3; ++k) {
    spec.anchors.push_back(Vector::Zero(2));
    spec.coefficients.push_back({{{0, 0}, 0.1 * (k + 1)}});
  }
  const auto poly = build_poly(spec);
  const std::vector<ReluNetwork> front = {build_identity(2, poly.net.depth()), poly.net};
  const auto picked = compose(build_filter(3, 2, 3), parallel(front));
  Draws g(9);
  for (int i = 0; i < 20; ++i) {
    const Vector z = g.vector(2);
    const Vector out3 = evaluate(picked, z);
    CHECK(std::abs(out3[0] - z[0]) <= 1e-12);
    CHECK(std::abs(out3[2] - 0.3) <= 1e-12);
  }
}

TEST_CASE("max is exact") {
  CHECK(evaluate(build_max(1), xy({-4.5}))[0] == -4.5);
  CHECK(evaluate(build_max(4), xy({1, 7, 3, 3}))[0] == 7.0);
  CHECK(evaluate(build_max(3), xy({-2, -2, -5}))[0] == -2.0);
  CHECK_THROWS_AS(build_max(0), ParameterError);
  Draws g(6);
  for (std::size_t m = 2; m <= 32; ++m) {
    const auto net = build_max(m);
    CHECK(net.depth() == static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(m)))) + 1);
    for (int i = 0; i < 1000 / 31 + 1; ++i) {
      Vector x = g.vector(static_cast<Eigen::Index>(m), -5.0, 5.0);
      if (i % 3 == 0) x[static_cast<Eigen::Index>(g.index(m))] = x.maxCoeff(); // tie
      // exact up to the rounding of (a - b) + b
      CHECK(std::abs(evaluate(net, x)[0] - x.maxCoeff()) <= 1e-12);
    }
  }
}

TEST_CASE("clamp") {
  const auto g = build_clamp();
  CHECK(evaluate(g, xy({0}))[0] == -1.0);
  CHECK(evaluate(g, xy({4}))[0] == 1.0);
  CHECK(evaluate(g, xy({2}))[0] == 0.0);
  const auto s = size_of(g);
  CHECK(s.depth_L == 3);
  CHECK(s.max_weight_B <= 2.0);
  CHECK(s.nonzeros_K == 6); // every stored weight and bias of the three maps
  Draws d(1);
  for (int i = 0; i < 1000; ++i) {
    const double z = d.uniform(-10.0, 10.0);
    CHECK(evaluate(g, xy({z}))[0] == std::min(std::max(1.0, z), 3.0) - 2.0);
  }
}

TEST_CASE("identity network") {
  const auto id = build_identity(3, 5);
  CHECK(evaluate(id, xy({-1, 0, 2})) == xy({-1, 0, 2}));
  CHECK(id.depth() == 5);
  CHECK(size_of(id).nonzeros_K == 4 * 3 * 4);
  CHECK(size_of(build_identity(3, 1)).nonzeros_K == 3);
}

TEST_CASE("window clamps each coordinate") {
  const auto w = build_window(2, 0.0, 4.0);
  CHECK(evaluate(w, xy({-1, 2.5})) == xy({0, 2.5}));
  CHECK(evaluate(w, xy({7, 4})) == xy({4, 4}));
}

TEST_CASE("multiplication gadget meets its certificate") {
  double prev_err[2] = {0.0, 0.0};
  for (int T : {2, 4, 6, 8}) {
    int mi = 0;
    for (double M : {1.0, 4.0}) {
      const auto g = build_mult(T, M);
      CHECK(g.certificate == doctest::Approx(3.0 * M * M * std::pow(4.0, -T - 1)));
      CHECK(g.net.depth() == static_cast<std::size_t>(T + 1));
      double err = 0.0;
      for (int i = 0; i <= 100; ++i) {
        for (int j = 0; j <= 100; ++j) {
          const double a = -M + 2.0 * M * i / 100.0, b = -M + 2.0 * M * j / 100.0;
          err = std::max(err, std::abs(evaluate(g.net, xy({a, b}))[0] - a * b));
        }
      }
      CHECK(err <= g.certificate);
      CHECK(std::abs(evaluate(g.net, xy({0.0, 0.7 * M}))[0]) <= g.certificate);
      if (T > 2) CHECK(prev_err[mi] >= 10.0 * err);
      prev_err[mi++] = err;
    }
  }
}

TEST_CASE("poly: constant and linear") {
  TaylorSpec c;
  c.beta = 0.5;
  c.anchors = {Vector::Zero(2)};
  c.coefficients = {{{{0, 0}, 0.7}}};
  const auto pc = build_poly(c);
  Draws g(12);
  for (int i = 0; i < 50; ++i) CHECK(evaluate(pc.net, g.vector(2, -3.0, 3.0))[0] == 0.7);

  TaylorSpec l;
  l.beta = 1.0;
  l.epsilon = 0.01;
  l.anchors = {Vector::Constant(1, 0.25)};
  l.coefficients = {{{{1}, 1.0}}};
  const auto pl = build_poly(l);
  for (int i = 0; i <= 1000; ++i) {
    const double x = -1.0 + 2.0 * i / 1000.0;
    CHECK(std::abs(evaluate(pl.net, xy({x}))[0] - (x - 0.25)) <= 0.01);
  }
  CHECK_THROWS_AS(build_poly({l.anchors, l.coefficients, 1.0, 0.0, 1.0}), ParameterError);
}

TEST_CASE("poly: d=2, beta=2.5 random coefficients") {
  Draws g(31);
  TaylorSpec s;
  s.beta = 2.5;
  s.epsilon = 0.05;
  s.radius = 1.0;
  for (int k = 0; k < 3; ++k) {
    s.anchors.push_back(g.vector(2, -1.0, 1.0));
    std::map<MultiIndex, double> c;
    for (const auto &a : multi_indices(2, 2)) c[a] = g.uniform(-1.0, 1.0);
    s.coefficients.push_back(c);
  }
  const auto p = build_poly(s);
  CHECK(p.certificate <= s.epsilon);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const Vector x = g.vector(2);
    const Vector y = evaluate(p.net, x);
    for (int k = 0; k < 3; ++k) worst = std::max(worst, std::abs(y[k] - poly_value(s.coefficients[k], s.anchors[k], x)));
  }
  CHECK(worst <= s.epsilon);
}

TEST_CASE("poly: 50 random specs") {
  Draws g(77);
  for (int trial = 0; trial < 50; ++trial) {
    const auto d = static_cast<int>(1 + g.index(3));
    TaylorSpec s;
    s.beta = 1.0 + g.index(3) + g.uniform(0.0, 0.9);
    s.epsilon = g.uniform(0.02, 0.2);
    s.radius = g.uniform(0.5, 1.5);
    const int deg = static_cast<int>(std::floor(s.beta));
    const std::size_t m = 1 + g.index(3);
    for (std::size_t k = 0; k < m; ++k) {
      s.anchors.push_back(g.vector(d, -s.radius, s.radius));
      std::map<MultiIndex, double> c;
      for (const auto &a : multi_indices(d, deg)) c[a] = g.uniform(-1.0, 1.0);
      s.coefficients.push_back(c);
    }
    const auto p = build_poly(s);
    double worst = 0.0;
    for (int i = 0; i < 600; ++i) {
      const Vector x = g.vector(d, -s.radius, s.radius);
      const Vector y = evaluate(p.net, x);
      for (std::size_t k = 0; k < m; ++k) {
        worst = std::max(worst, std::abs(y[static_cast<Eigen::Index>(k)] -
                                         poly_value(s.coefficients[k], s.anchors[k], x)));
      }
    }
    CHECK(worst <= s.epsilon);
  }
}

TEST_CASE("group sum") {
  const auto g = build_group_sum({{0, 1}, {2}}, 3);
  CHECK(evaluate(g, xy({1, 2, 3})) == xy({3, 3}));
  CHECK(evaluate(build_group_sum({{0, 1, 2}}, 3), xy({1, 2, 3}))[0] == 6.0);
  CHECK(size_of(g).nonzeros_K == 3);
  CHECK_THROWS_AS(build_group_sum({{0, 1}, {1, 2}}, 3), ParameterError);
  CHECK_THROWS_AS(build_group_sum({{0}, {2}}, 3), ParameterError);
}

TEST_CASE("multi-index enumeration") {
  CHECK(multi_indices(2, 2).size() == 6);
  CHECK(multi_indices(3, 3).size() == 20);
  CHECK(multi_indices(1, 0).size() == 1);
}
