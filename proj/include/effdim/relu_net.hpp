#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <json.hpp>

#include <cstddef>
#include <span>
#include <vector>

namespace effdim {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// One affine map x -> W x + b.
struct AffineLayer {
  SparseMatrix weight;
  Vector bias;

  Eigen::Index rows() const { return weight.rows(); }
  Eigen::Index cols() const { return weight.cols(); }
};

/// Exact size metrics of a network: depth, largest absolute parameter and
/// number of nonzero parameters.
struct NetworkSize {
  std::size_t depth_L = 0;
  double max_weight_B = 0.0;
  std::size_t nonzeros_K = 0;

  friend bool operator==(const NetworkSize &, const NetworkSize &) = default;
};

/// Feed-forward ReLU network
///   f(x) = W_L relu(W_{L-1} ... relu(W_1 x + b_1) ... + b_{L-1}) + b_L.
/// The last affine map is not followed by a ReLU. Networks are immutable once
/// built; every operation returns a new network.
class ReluNetwork {
public:
  /// Validates adjacent layer dimensions; throws ShapeError otherwise.
  explicit ReluNetwork(std::vector<AffineLayer> layers);

  std::size_t depth() const { return layers_.size(); }
  Eigen::Index input_dim() const { return layers_.front().cols(); }
  Eigen::Index output_dim() const { return layers_.back().rows(); }
  const std::vector<AffineLayer> &layers() const { return layers_; }

  /// Widest layer output (the size of the largest intermediate vector).
  Eigen::Index max_width() const;

private:
  std::vector<AffineLayer> layers_;
};

/// Builds an affine layer from a dense matrix; exact zeros are not stored.
AffineLayer make_layer(const Matrix &weight, const Vector &bias);

Vector evaluate(const ReluNetwork &net, const Vector &x);
Vector evaluate(const ReluNetwork &net, std::span<const double> x);

/// Evaluates a batch; column j of `inputs` is one input point.
Matrix evaluate_batch(const ReluNetwork &net, const Matrix &inputs);

/// outer(inner(x)). The output affine map of `inner` and the input affine map
/// of `outer` are merged into one layer, so
///   depth(compose(o, i)) = depth(o) + depth(i) - 1
/// and no ReLU is applied to the intermediate value.
ReluNetwork compose(const ReluNetwork &outer, const ReluNetwork &inner);

/// Runs networks side by side on the same input and concatenates their
/// outputs. Shallower networks are padded with exact identity stages so all
/// components share the depth of the deepest one.
ReluNetwork parallel(std::span<const ReluNetwork> nets);

/// Like `parallel`, but component i reads its own slice of the input; the
/// input is the concatenation of the component inputs.
ReluNetwork stack(std::span<const ReluNetwork> nets);

NetworkSize size_of(const ReluNetwork &net);

/// Inputs of the log covering-number bound for F(L, B, K).
struct ClassBoundInput {
  double delta = 1.0;
  double tau = 0.0;
  double R_S = 1.0;
  NetworkSize size;
  std::size_t ambient_d = 1;
};

/// K log(2^L sqrt(d L) K^{L/2} B^L R_S / sqrt(delta^2 - 4 tau)).
/// Throws DomainError when delta^2 <= 4 tau.
double class_covering_bound(const ClassBoundInput &inp);

/// {"layers":[{"w":[[...]],"b":[...]}, ...]}; doubles are written in
/// shortest round-trip form, so from_json(to_json(n)) is bit-exact.
nlohmann::json to_json(const ReluNetwork &net);
ReluNetwork network_from_json(const nlohmann::json &doc);

} // namespace effdim

namespace effdim {

/// Exact identity on R^d with the requested number of affine layers.
/// depth 1 is the single map x -> x; deeper networks carry (relu(x), relu(-x))
/// through the hidden layers. Nonzeros: d for depth 1, 4 d (depth - 1)
/// otherwise.
ReluNetwork identity_network(Eigen::Index d, std::size_t depth);

} // namespace effdim
