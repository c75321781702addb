#include "effdim/relu_net.hpp"

#include "effdim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace effdim {

namespace {

SparseMatrix from_triplets(Eigen::Index rows, Eigen::Index cols,
                           const std::vector<Eigen::Triplet<double>> &trips) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(trips.begin(), trips.end());
  m.prune(0.0);
  m.makeCompressed();
  return m;
}

void check_shapes(const std::vector<AffineLayer> &layers) {
  if (layers.empty()) {
    throw ShapeError("network needs at least one layer");
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].bias.size() != layers[l].rows()) {
      throw ShapeError("layer " + std::to_string(l) + ": bias length " +
                       std::to_string(layers[l].bias.size()) + " != rows " +
                       std::to_string(layers[l].rows()));
    }
    if (layers[l].cols() == 0 || layers[l].rows() == 0) {
      throw ShapeError("layer " + std::to_string(l) + " has an empty dimension");
    }
    if (l > 0 && layers[l].cols() != layers[l - 1].rows()) {
      throw ShapeError("layer " + std::to_string(l) + " expects " +
                       std::to_string(layers[l].cols()) + " inputs but layer " +
                       std::to_string(l - 1) + " produces " +
                       std::to_string(layers[l - 1].rows()));
    }
  }
}

// Stacks the given matrices on the diagonal. If `shared_input` is set, all
// blocks read the same columns instead (vertical stacking).
SparseMatrix block_assemble(const std::vector<const SparseMatrix *> &blocks, bool shared_input) {
  Eigen::Index rows = 0, cols = 0;
  for (const auto *b : blocks) {
    rows += b->rows();
    cols = shared_input ? b->cols() : cols + b->cols();
  }
  std::vector<Eigen::Triplet<double>> trips;
  Eigen::Index r0 = 0, c0 = 0;
  for (const auto *b : blocks) {
    for (Eigen::Index i = 0; i < b->outerSize(); ++i) {
      for (SparseMatrix::InnerIterator it(*b, i); it; ++it) {
        trips.emplace_back(r0 + it.row(), c0 + it.col(), it.value());
      }
    }
    r0 += b->rows();
    if (!shared_input) {
      c0 += b->cols();
    }
  }
  return from_triplets(rows, cols, trips);
}

Vector concat_bias(const std::vector<const Vector *> &parts) {
  Eigen::Index n = 0;
  for (const auto *p : parts) n += p->size();
  Vector out(n);
  Eigen::Index off = 0;
  for (const auto *p : parts) {
    out.segment(off, p->size()) = *p;
    off += p->size();
  }
  return out;
}

ReluNetwork pad_to_depth(const ReluNetwork &net, std::size_t depth) {
  if (net.depth() == depth) return net;
  return compose(identity_network(net.output_dim(), depth - net.depth() + 1), net);
}

ReluNetwork assemble(std::span<const ReluNetwork> nets, bool shared_input) {
  if (nets.empty()) {
    throw ShapeError("parallel/stack needs at least one network");
  }
  std::size_t depth = 0;
  for (const auto &n : nets) depth = std::max(depth, n.depth());
  if (shared_input) {
    for (const auto &n : nets) {
      if (n.input_dim() != nets.front().input_dim()) {
        throw ShapeError("parallel: input dimensions differ (" + std::to_string(n.input_dim()) +
                         " vs " + std::to_string(nets.front().input_dim()) + ")");
      }
    }
  }
  std::vector<ReluNetwork> padded;
  padded.reserve(nets.size());
  for (const auto &n : nets) padded.push_back(pad_to_depth(n, depth));

  std::vector<AffineLayer> layers;
  layers.reserve(depth);
  for (std::size_t l = 0; l < depth; ++l) {
    std::vector<const SparseMatrix *> ws;
    std::vector<const Vector *> bs;
    for (const auto &n : padded) {
      ws.push_back(&n.layers()[l].weight);
      bs.push_back(&n.layers()[l].bias);
    }
    layers.push_back({block_assemble(ws, shared_input && l == 0), concat_bias(bs)});
  }
  return ReluNetwork(std::move(layers));
}

} // namespace

ReluNetwork::ReluNetwork(std::vector<AffineLayer> layers) : layers_(std::move(layers)) {
  check_shapes(layers_);
  for (auto &l : layers_) l.weight.makeCompressed();
}

Eigen::Index ReluNetwork::max_width() const {
  Eigen::Index w = input_dim();
  for (const auto &l : layers_) w = std::max(w, l.rows());
  return w;
}

AffineLayer make_layer(const Matrix &weight, const Vector &bias) {
  return {weight.sparseView(1.0, 0.0), bias};
}

Vector evaluate(const ReluNetwork &net, const Vector &x) {
  if (x.size() != net.input_dim()) {
    throw ShapeError("evaluate: input has length " + std::to_string(x.size()) +
                     ", network expects " + std::to_string(net.input_dim()));
  }
  Vector h = x;
  const auto &layers = net.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Vector next = layers[l].weight * h + layers[l].bias;
    if (l + 1 < layers.size()) next = next.cwiseMax(0.0);
    h = std::move(next);
  }
  return h;
}

Vector evaluate(const ReluNetwork &net, std::span<const double> x) {
  return evaluate(net, Vector(Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(x.size()))));
}

Matrix evaluate_batch(const ReluNetwork &net, const Matrix &inputs) {
  if (inputs.rows() != net.input_dim()) {
    throw ShapeError("evaluate_batch: inputs have " + std::to_string(inputs.rows()) +
                     " rows, network expects " + std::to_string(net.input_dim()));
  }
  Matrix h = inputs;
  const auto &layers = net.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Matrix next = layers[l].weight * h;
    next.colwise() += layers[l].bias;
    if (l + 1 < layers.size()) next = next.cwiseMax(0.0);
    h = std::move(next);
  }
  return h;
}

ReluNetwork compose(const ReluNetwork &outer, const ReluNetwork &inner) {
  if (outer.input_dim() != inner.output_dim()) {
    throw ShapeError("compose: outer expects " + std::to_string(outer.input_dim()) +
                     " inputs, inner produces " + std::to_string(inner.output_dim()));
  }
  const auto &il = inner.layers();
  const auto &ol = outer.layers();
  std::vector<AffineLayer> layers(il.begin(), il.end() - 1);
  const AffineLayer &last = il.back();
  const AffineLayer &first = ol.front();
  SparseMatrix w = (first.weight * last.weight).pruned(0.0);
  Vector b = first.weight * last.bias + first.bias;
  layers.push_back({std::move(w), std::move(b)});
  layers.insert(layers.end(), ol.begin() + 1, ol.end());
  return ReluNetwork(std::move(layers));
}

ReluNetwork parallel(std::span<const ReluNetwork> nets) { return assemble(nets, true); }

ReluNetwork stack(std::span<const ReluNetwork> nets) { return assemble(nets, false); }

NetworkSize size_of(const ReluNetwork &net) {
  NetworkSize s;
  s.depth_L = net.depth();
  for (const auto &l : net.layers()) {
    for (Eigen::Index i = 0; i < l.weight.outerSize(); ++i) {
      for (SparseMatrix::InnerIterator it(l.weight, i); it; ++it) {
        if (it.value() != 0.0) {
          ++s.nonzeros_K;
          s.max_weight_B = std::max(s.max_weight_B, std::abs(it.value()));
        }
      }
    }
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) {
      if (l.bias[i] != 0.0) {
        ++s.nonzeros_K;
        s.max_weight_B = std::max(s.max_weight_B, std::abs(l.bias[i]));
      }
    }
  }
  return s;
}

double class_covering_bound(const ClassBoundInput &inp) {
  const double gap = inp.delta * inp.delta - 4.0 * inp.tau;
  if (!(gap > 0.0)) {
    throw DomainError("class_covering_bound: bound undefined for delta^2 <= 4 tau");
  }
  const auto &s = inp.size;
  if (s.nonzeros_K == 0) return 0.0;
  if (s.depth_L == 0 || !(s.max_weight_B > 0.0) || !(inp.R_S > 0.0) || inp.ambient_d == 0) {
    throw ParameterError("class_covering_bound: L, B, R_S and d must be positive");
  }
  const double L = static_cast<double>(s.depth_L);
  const double K = static_cast<double>(s.nonzeros_K);
  const double d = static_cast<double>(inp.ambient_d);
  const double log_arg = L * std::log(2.0) + 0.5 * std::log(d * L) + 0.5 * L * std::log(K) +
                         L * std::log(s.max_weight_B) + std::log(inp.R_S) - 0.5 * std::log(gap);
  return K * log_arg;
}

ReluNetwork identity_network(Eigen::Index d, std::size_t depth) {
  if (d <= 0 || depth == 0) {
    throw ParameterError("identity_network: need d >= 1 and depth >= 1");
  }
  using T = Eigen::Triplet<double>;
  if (depth == 1) {
    std::vector<T> t;
    for (Eigen::Index i = 0; i < d; ++i) t.emplace_back(i, i, 1.0);
    return ReluNetwork({{from_triplets(d, d, t), Vector::Zero(d)}});
  }
  std::vector<AffineLayer> layers;
  {
    std::vector<T> t;
    for (Eigen::Index i = 0; i < d; ++i) {
      t.emplace_back(i, i, 1.0);
      t.emplace_back(d + i, i, -1.0);
    }
    layers.push_back({from_triplets(2 * d, d, t), Vector::Zero(2 * d)});
  }
  for (std::size_t l = 1; l + 1 < depth; ++l) {
    std::vector<T> t;
    for (Eigen::Index i = 0; i < d; ++i) {
      t.emplace_back(i, i, 1.0);
      t.emplace_back(i, d + i, -1.0);
      t.emplace_back(d + i, i, -1.0);
      t.emplace_back(d + i, d + i, 1.0);
    }
    layers.push_back({from_triplets(2 * d, 2 * d, t), Vector::Zero(2 * d)});
  }
  {
    std::vector<T> t;
    for (Eigen::Index i = 0; i < d; ++i) {
      t.emplace_back(i, i, 1.0);
      t.emplace_back(i, d + i, -1.0);
    }
    layers.push_back({from_triplets(d, 2 * d, t), Vector::Zero(d)});
  }
  return ReluNetwork(std::move(layers));
}

nlohmann::json to_json(const ReluNetwork &net) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto &l : net.layers()) {
    const Matrix dense = Matrix(l.weight);
    nlohmann::json w = nlohmann::json::array();
    for (Eigen::Index i = 0; i < dense.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index j = 0; j < dense.cols(); ++j) row.push_back(dense(i, j));
      w.push_back(std::move(row));
    }
    nlohmann::json b = nlohmann::json::array();
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) b.push_back(l.bias[i]);
    layers.push_back({{"w", std::move(w)}, {"b", std::move(b)}});
  }
  return {{"layers", std::move(layers)}};
}

ReluNetwork network_from_json(const nlohmann::json &doc) {
  if (!doc.is_object() || !doc.contains("layers") || !doc["layers"].is_array()) {
    throw ShapeError("network JSON: expected an object with a \"layers\" array");
  }
  std::vector<AffineLayer> layers;
  for (const auto &jl : doc["layers"]) {
    const auto &w = jl.at("w");
    const auto &b = jl.at("b");
    const auto rows = static_cast<Eigen::Index>(w.size());
    const auto cols = rows > 0 ? static_cast<Eigen::Index>(w[0].size()) : 0;
    Matrix dense(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (static_cast<Eigen::Index>(w[i].size()) != cols) {
        throw ShapeError("network JSON: ragged weight matrix");
      }
      for (Eigen::Index j = 0; j < cols; ++j) dense(i, j) = w[i][j].get<double>();
    }
    Vector bias(static_cast<Eigen::Index>(b.size()));
    for (Eigen::Index i = 0; i < bias.size(); ++i) bias[i] = b[i].get<double>();
    layers.push_back(make_layer(dense, bias));
  }
  return ReluNetwork(std::move(layers));
}

} // namespace effdim
