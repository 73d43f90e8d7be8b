#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "deepex/rng.hpp"

namespace deepex::nn {

enum class Activation { kRelu, kIdentity };

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
  Activation activation = Activation::kIdentity;
};

/// Fully connected feed-forward network. Hidden layers are rectified-linear,
/// the output layer is the identity.
class DenseNet {
 public:
  DenseNet() = default;
  explicit DenseNet(std::vector<DenseLayer> layers);

  std::size_t input_size() const;
  std::size_t output_size() const;
  std::size_t num_layers() const { return layers_.size(); }
  bool empty() const { return layers_.empty(); }

  /// Width of the representation fed into the output layer.
  std::size_t representation_size() const;

  std::size_t parameter_count() const;
  std::vector<std::size_t> layer_sizes() const;

  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& mutable_layers() { return layers_; }

  /// FNV-1a digest over shapes and raw parameter bytes.
  std::uint64_t checksum() const;

  bool all_finite() const;

  friend bool operator==(const DenseNet& a, const DenseNet& b);

 private:
  std::vector<DenseLayer> layers_;
};

/// Glorot-normal weights (variance 2 / (fan_in + fan_out)), zero biases.
DenseNet glorot_init(std::span<const std::size_t> layer_sizes, Rng& rng);

/// Per-layer values kept by forward() for the backward pass. Columns are batch
/// entries.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> layer_inputs;
  std::vector<Eigen::MatrixXd> pre_activations;
  std::vector<std::size_t> shapes;  // layer sizes of the net that produced it
  bool first_input_elided = false;  // set by forward_from_preactivation

  /// Last-hidden representation, i.e. the input of the output layer.
  const Eigen::MatrixXd& representation() const { return layer_inputs.back(); }
  Eigen::Index batch_size() const {
    return layer_inputs.empty() ? 0 : layer_inputs.front().cols();
  }
};

Eigen::MatrixXd forward(const DenseNet& net, const Eigen::MatrixXd& inputs,
                        ForwardCache* cache = nullptr);
Eigen::VectorXd forward(const DenseNet& net, const Eigen::VectorXd& x);

/// Forward pass from a caller-supplied first-layer pre-activation, for inputs
/// whose affine map is cheaper to form directly. The cache keeps no first-layer
/// input, so backward() returns zero first-layer gradients and leaves them to
/// the caller via BackwardResult::first_delta.
Eigen::MatrixXd forward_from_preactivation(const DenseNet& net, Eigen::MatrixXd first_pre,
                                           ForwardCache* cache = nullptr);

struct LayerGradient {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;
};

struct Gradients {
  std::vector<LayerGradient> layers;

  static Gradients zeros_like(const DenseNet& net);

  Gradients& operator+=(const Gradients& other);
  Gradients& operator*=(double scale);
  bool all_finite() const;
  bool congruent_with(const DenseNet& net) const;
  double max_abs() const;
};

struct BackwardResult {
  Gradients params;
  Eigen::MatrixXd inputs;       // d(out . upstream) / d(inputs); empty for elided inputs
  Eigen::MatrixXd first_delta;  // d(out . upstream) / d(first-layer pre-activation)
};

/// Reverse-mode gradient of sum(output .* upstream), summed over the batch.
BackwardResult backward(const DenseNet& net, const ForwardCache& cache,
                        const Eigen::MatrixXd& upstream);

}  // namespace deepex::nn
