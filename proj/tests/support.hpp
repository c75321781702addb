#pragma once

#include "effdim/relu_net.hpp"
#include "effdim/rng.hpp"

#include <cstdint>
#include <vector>

namespace effdim::testing {

// Deterministic uniform stream for test fixtures.
class Draws {
public:
  explicit Draws(std::uint64_t seed) : rng_(seed, 0x7e57) {}
  double uniform(double lo = 0.0, double hi = 1.0) { return lo + (hi - lo) * rng_.uniform(next_++); }
  double normal() { return rng_.normal(2 * next_++); }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(rng_.bits(next_++) % n); }
  Vector vector(Eigen::Index d, double lo = -1.0, double hi = 1.0) {
    Vector v(d);
    for (Eigen::Index i = 0; i < d; ++i) v[i] = uniform(lo, hi);
    return v;
  }

private:
  CounterRng rng_;
  std::uint64_t next_ = 0;
};

// Random dense network with about 20% exact zeros.
inline ReluNetwork random_network(Draws &g, Eigen::Index in, Eigen::Index out, std::size_t depth) {
  std::vector<AffineLayer> layers;
  Eigen::Index prev = in;
  for (std::size_t l = 0; l < depth; ++l) {
    const Eigen::Index rows = l + 1 == depth ? out : static_cast<Eigen::Index>(1 + g.index(5));
    Matrix w(rows, prev);
    for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = g.uniform() < 0.2 ? 0.0 : g.uniform(-1.5, 1.5);
    layers.push_back(make_layer(w, g.vector(rows)));
    prev = rows;
  }
  return ReluNetwork(std::move(layers));
}

inline ReluNetwork affine(const Matrix &w, const Vector &b) { return ReluNetwork({make_layer(w, b)}); }

} // namespace effdim::testing
