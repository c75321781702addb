#include "effdim/kernels.hpp"

#include "effdim/errors.hpp"
#include "effdim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

namespace effdim::kernels {

namespace {

constexpr std::uint64_t kSampleStream = 0x5a3b; // same stream as sample()
constexpr std::uint64_t kTailStream = 0x7a11;

bool outside_draw(const EllipsoidSet &set, const CounterRng &rng, std::size_t i, Vector &z, Vector &x) {
  const auto d = static_cast<Eigen::Index>(set.profile.dim());
  for (Eigen::Index j = 0; j < d; ++j) {
    z[j] = set.profile.lambdas[j] * rng.normal(static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(d) +
                                               static_cast<std::uint64_t>(j));
  }
  if (!set.profile.rotated()) return !membership_eigen(set, z.data());
  x.noalias() = set.profile.Q * z;
  return !membership(set, x);
}

void tail_draw(std::size_t p, const std::vector<double> &t2, const CounterRng &rng, std::size_t i,
               std::vector<std::size_t> &counts) {
  double s = 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    const double z = rng.normal(i * p + j);
    s += z * z;
  }
  for (std::size_t q = 0; q < t2.size(); ++q) counts[q] += s > t2[q];
}

void check_knn(const Matrix &points, std::size_t k) {
  if (k == 0 || k >= static_cast<std::size_t>(points.rows())) {
    throw ParameterError("knn: need 1 <= k < n (k = " + std::to_string(k) + ", n = " +
                         std::to_string(points.rows()) + ")");
  }
}

using Cand = std::pair<double, Eigen::Index>;

// Plain loop so the serial and tree paths round identically.
double sqdist(const double *a, const double *b, Eigen::Index d) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < d; ++j) {
    const double t = a[j] - b[j];
    s += t * t;
  }
  return s;
}

void write_row(std::vector<Cand> &cand, std::size_t k, Eigen::Index i, Matrix &out) {
  std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
  for (std::size_t j = 0; j < k; ++j) out(i, static_cast<Eigen::Index>(j)) = std::sqrt(cand[j].first);
}

// Exact kd-tree over the columns of X (one point per column).
class KdTree {
public:
  explicit KdTree(const Matrix &X) : X_(X), d_(X.rows()), idx_(static_cast<std::size_t>(X.cols())) {
    for (std::size_t i = 0; i < idx_.size(); ++i) idx_[i] = static_cast<Eigen::Index>(i);
    build(0, idx_.size());
  }

  // k nearest (squared distance, index) pairs of point i, excluding i; ties go to the lower index.
  void query(Eigen::Index i, std::size_t k, std::vector<Cand> &heap) const {
    heap.clear();
    std::vector<double> off(static_cast<std::size_t>(d_), 0.0);
    search(0, X_.col(i).data(), i, k, 0.0, off, heap);
  }

private:
  static constexpr std::size_t kLeaf = 16;
  struct Node {
    std::size_t lo, hi;
    Eigen::Index dim = -1;
    double split = 0.0;
    std::size_t left = 0, right = 0;
  };

  std::size_t build(std::size_t lo, std::size_t hi) {
    const std::size_t id = nodes_.size();
    nodes_.push_back({lo, hi});
    if (hi - lo <= kLeaf) return id;
    Eigen::Index best = 0;
    double spread = -1.0;
    for (Eigen::Index j = 0; j < d_; ++j) {
      double mn = std::numeric_limits<double>::infinity(), mx = -mn;
      for (std::size_t t = lo; t < hi; ++t) {
        mn = std::min(mn, X_(j, idx_[t]));
        mx = std::max(mx, X_(j, idx_[t]));
      }
      if (mx - mn > spread) spread = mx - mn, best = j;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    std::nth_element(idx_.begin() + static_cast<std::ptrdiff_t>(lo), idx_.begin() + static_cast<std::ptrdiff_t>(mid),
                     idx_.begin() + static_cast<std::ptrdiff_t>(hi),
                     [&](Eigen::Index a, Eigen::Index b) { return X_(best, a) < X_(best, b); });
    const double split = X_(best, idx_[mid]);
    const std::size_t left = build(lo, mid);
    const std::size_t right = build(mid, hi);
    nodes_[id].dim = best;
    nodes_[id].split = split;
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  void search(std::size_t id, const double *q, Eigen::Index self, std::size_t k, double bound, std::vector<double> &off,
              std::vector<Cand> &heap) const {
    const Node &nd = nodes_[id];
    if (nd.dim < 0) {
      for (std::size_t t = nd.lo; t < nd.hi; ++t) {
        const Eigen::Index j = idx_[t];
        if (j == self) continue;
        const Cand c{sqdist(q, X_.col(j).data(), d_), j};
        if (heap.size() < k) {
          heap.push_back(c);
          std::push_heap(heap.begin(), heap.end());
        } else if (c < heap.front()) {
          std::pop_heap(heap.begin(), heap.end());
          heap.back() = c;
          std::push_heap(heap.begin(), heap.end());
        }
      }
      return;
    }
    const double diff = q[nd.dim] - nd.split;
    const std::size_t near = diff < 0.0 ? nd.left : nd.right;
    const std::size_t far = diff < 0.0 ? nd.right : nd.left;
    search(near, q, self, k, bound, off, heap);
    double &o = off[static_cast<std::size_t>(nd.dim)];
    const double saved = o;
    const double far_bound = bound - saved * saved + diff * diff;
    // Slack keeps equal-distance points whose bound rounds up.
    if (heap.size() < k || far_bound <= heap.front().first * (1.0 + 1e-12)) {
      o = diff;
      search(far, q, self, k, far_bound, off, heap);
      o = saved;
    }
  }

  const Matrix &X_;
  Eigen::Index d_;
  std::vector<Eigen::Index> idx_;
  std::vector<Node> nodes_;
};

} // namespace

Matrix evaluate_batch_serial(const ReluNetwork &net, const Matrix &inputs) {
  Matrix out(net.output_dim(), inputs.cols());
  for (Eigen::Index c = 0; c < inputs.cols(); ++c) out.col(c) = evaluate(net, Vector(inputs.col(c)));
  return out;
}

Matrix evaluate_batch_omp(const ReluNetwork &net, const Matrix &inputs) {
  if (inputs.rows() != net.input_dim()) {
    throw ShapeError("evaluate_batch: inputs have " + std::to_string(inputs.rows()) + " rows, network expects " +
                     std::to_string(net.input_dim()));
  }
  constexpr Eigen::Index kChunk = 256;
  const Eigen::Index n = inputs.cols();
  Matrix out(net.output_dim(), n);
  const Eigen::Index chunks = (n + kChunk - 1) / kChunk;
#pragma omp parallel for schedule(dynamic, 1)
  for (Eigen::Index c = 0; c < chunks; ++c) {
    const Eigen::Index lo = c * kChunk, w = std::min(kChunk, n - lo);
    for (Eigen::Index j = lo; j < lo + w; ++j) out.col(j) = evaluate(net, Vector(inputs.col(j)));
  }
  return out;
}

std::size_t count_outside_serial(const EllipsoidSet &set, std::size_t n, std::uint64_t seed) {
  const CounterRng rng(seed, kSampleStream);
  Vector z(set.profile.lambdas.size()), x(set.profile.lambdas.size());
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) count += outside_draw(set, rng, i, z, x);
  return count;
}

std::size_t count_outside_omp(const EllipsoidSet &set, std::size_t n, std::uint64_t seed) {
  const CounterRng rng(seed, kSampleStream);
  std::size_t count = 0;
#pragma omp parallel reduction(+ : count)
  {
    Vector z(set.profile.lambdas.size()), x(set.profile.lambdas.size());
#pragma omp for schedule(static)
    for (std::size_t i = 0; i < n; ++i) count += outside_draw(set, rng, i, z, x);
  }
  return count;
}

std::vector<std::size_t> tail_counts_serial(std::size_t p, const std::vector<double> &ts, std::size_t n,
                                            std::uint64_t seed) {
  const CounterRng rng(seed, kTailStream + p);
  std::vector<double> t2;
  for (double t : ts) t2.push_back(t * t);
  std::vector<std::size_t> counts(ts.size(), 0);
  for (std::size_t i = 0; i < n; ++i) tail_draw(p, t2, rng, i, counts);
  return counts;
}

std::vector<std::size_t> tail_counts_omp(std::size_t p, const std::vector<double> &ts, std::size_t n,
                                         std::uint64_t seed) {
  const CounterRng rng(seed, kTailStream + p);
  std::vector<double> t2;
  for (double t : ts) t2.push_back(t * t);
  std::vector<std::size_t> counts(ts.size(), 0);
#pragma omp parallel
  {
    std::vector<std::size_t> local(ts.size(), 0);
#pragma omp for schedule(static)
    for (std::size_t i = 0; i < n; ++i) tail_draw(p, t2, rng, i, local);
#pragma omp critical
    for (std::size_t q = 0; q < ts.size(); ++q) counts[q] += local[q];
  }
  return counts;
}

Matrix knn_distances_serial(const Matrix &points, std::size_t k) {
  check_knn(points, k);
  const Matrix X = points.transpose();
  const Eigen::Index n = points.rows();
  Matrix out(n, static_cast<Eigen::Index>(k));
  std::vector<Cand> cand;
  for (Eigen::Index i = 0; i < n; ++i) {
    cand.clear();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) cand.emplace_back(sqdist(X.col(i).data(), X.col(j).data(), X.rows()), j);
    }
    write_row(cand, k, i, out);
  }
  return out;
}

Matrix knn_distances_omp(const Matrix &points, std::size_t k) {
  check_knn(points, k);
  const Matrix X = points.transpose();
  const KdTree tree(X);
  const Eigen::Index n = points.rows();
  Matrix out(n, static_cast<Eigen::Index>(k));
#pragma omp parallel
  {
    std::vector<Cand> heap;
#pragma omp for schedule(dynamic, 256)
    for (Eigen::Index i = 0; i < n; ++i) {
      tree.query(i, k, heap);
      write_row(heap, k, i, out);
    }
  }
  return out;
}

} // namespace effdim::kernels
