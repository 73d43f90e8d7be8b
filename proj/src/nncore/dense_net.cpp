#include "deepex/nncore/dense_net.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "deepex/errors.hpp"

namespace deepex::nn {
namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

void fnv_bytes(std::uint64_t& h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
}

void fnv_value(std::uint64_t& h, std::uint64_t v) { fnv_bytes(h, &v, sizeof v); }

}  // namespace

DenseNet::DenseNet(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw ConfigError("DenseNet needs at least one layer");
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const auto& layer = layers_[k];
    if (layer.weight.rows() == 0 || layer.weight.cols() == 0)
      throw ConfigError("DenseNet layer " + std::to_string(k) + " has an empty weight matrix");
    if (layer.bias.size() != layer.weight.rows())
      throw ShapeError("DenseNet layer " + std::to_string(k) + ": bias length " +
                       std::to_string(layer.bias.size()) + " != output size " +
                       std::to_string(layer.weight.rows()));
    if (k > 0 && layers_[k - 1].weight.rows() != layer.weight.cols())
      throw ShapeError("DenseNet layer " + std::to_string(k) + " input size " +
                       std::to_string(layer.weight.cols()) + " does not chain with previous output " +
                       std::to_string(layers_[k - 1].weight.rows()));
  }
  if (!all_finite()) throw NumericError("DenseNet constructed with non-finite parameters");
}

std::size_t DenseNet::input_size() const {
  return layers_.empty() ? 0 : static_cast<std::size_t>(layers_.front().weight.cols());
}

std::size_t DenseNet::output_size() const {
  return layers_.empty() ? 0 : static_cast<std::size_t>(layers_.back().weight.rows());
}

std::size_t DenseNet::representation_size() const {
  return layers_.empty() ? 0 : static_cast<std::size_t>(layers_.back().weight.cols());
}

std::size_t DenseNet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

std::vector<std::size_t> DenseNet::layer_sizes() const {
  std::vector<std::size_t> sizes;
  if (layers_.empty()) return sizes;
  sizes.push_back(input_size());
  for (const auto& l : layers_) sizes.push_back(static_cast<std::size_t>(l.weight.rows()));
  return sizes;
}

std::uint64_t DenseNet::checksum() const {
  std::uint64_t h = kFnvOffset;
  fnv_value(h, layers_.size());
  for (const auto& l : layers_) {
    fnv_value(h, static_cast<std::uint64_t>(l.weight.rows()));
    fnv_value(h, static_cast<std::uint64_t>(l.weight.cols()));
    fnv_value(h, static_cast<std::uint64_t>(l.activation));
    fnv_bytes(h, l.weight.data(), sizeof(double) * static_cast<std::size_t>(l.weight.size()));
    fnv_bytes(h, l.bias.data(), sizeof(double) * static_cast<std::size_t>(l.bias.size()));
  }
  return h;
}

bool DenseNet::all_finite() const {
  for (const auto& l : layers_)
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  return true;
}

bool operator==(const DenseNet& a, const DenseNet& b) {
  if (a.layers_.size() != b.layers_.size()) return false;
  for (std::size_t k = 0; k < a.layers_.size(); ++k) {
    const auto& x = a.layers_[k];
    const auto& y = b.layers_[k];
    if (x.activation != y.activation || x.weight.rows() != y.weight.rows() ||
        x.weight.cols() != y.weight.cols() || x.weight != y.weight || x.bias != y.bias)
      return false;
  }
  return true;
}

DenseNet glorot_init(std::span<const std::size_t> layer_sizes, Rng& rng) {
  if (layer_sizes.size() < 2) throw ConfigError("glorot_init needs at least two layer sizes");
  for (std::size_t s : layer_sizes)
    if (s == 0) throw ConfigError("glorot_init layer sizes must be positive");

  std::vector<DenseLayer> layers;
  layers.reserve(layer_sizes.size() - 1);
  for (std::size_t k = 0; k + 1 < layer_sizes.size(); ++k) {
    const auto fan_in = static_cast<Eigen::Index>(layer_sizes[k]);
    const auto fan_out = static_cast<Eigen::Index>(layer_sizes[k + 1]);
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fan_in + fan_out)));
    DenseLayer layer;
    layer.weight.resize(fan_out, fan_in);
    // Column-major fill order is part of the determinism contract.
    for (Eigen::Index j = 0; j < fan_in; ++j)
      for (Eigen::Index i = 0; i < fan_out; ++i) layer.weight(i, j) = dist(rng);
    layer.bias = Eigen::VectorXd::Zero(fan_out);
    layer.activation = (k + 2 == layer_sizes.size()) ? Activation::kIdentity : Activation::kRelu;
    layers.push_back(std::move(layer));
  }
  return DenseNet(std::move(layers));
}

Eigen::MatrixXd forward(const DenseNet& net, const Eigen::MatrixXd& inputs, ForwardCache* cache) {
  if (net.empty()) throw UsageError("forward on an empty DenseNet");
  if (static_cast<std::size_t>(inputs.rows()) != net.input_size())
    throw ShapeError("forward: input has " + std::to_string(inputs.rows()) + " rows, network expects " +
                     std::to_string(net.input_size()));
  if (cache) {
    cache->layer_inputs.clear();
    cache->pre_activations.clear();
    cache->shapes = net.layer_sizes();
    cache->first_input_elided = false;
  }
  Eigen::MatrixXd h = inputs;
  for (const auto& layer : net.layers()) {
    Eigen::MatrixXd pre = layer.weight * h;
    pre.colwise() += layer.bias;
    if (cache) {
      cache->layer_inputs.push_back(std::move(h));
      cache->pre_activations.push_back(pre);
    }
    h = layer.activation == Activation::kRelu ? Eigen::MatrixXd(pre.cwiseMax(0.0)) : std::move(pre);
  }
  return h;
}

Eigen::VectorXd forward(const DenseNet& net, const Eigen::VectorXd& x) {
  return forward(net, Eigen::MatrixXd(x)).col(0);
}

Eigen::MatrixXd forward_from_preactivation(const DenseNet& net, Eigen::MatrixXd first_pre, ForwardCache* cache) {
  if (net.empty()) throw UsageError("forward on an empty DenseNet");
  if (static_cast<std::size_t>(first_pre.rows()) != net.layer_sizes()[1])
    throw ShapeError("forward_from_preactivation: pre-activation has " + std::to_string(first_pre.rows()) +
                     " rows, first layer has " + std::to_string(net.layer_sizes()[1]));
  if (cache) {
    cache->layer_inputs.clear();
    cache->pre_activations.clear();
    cache->shapes = net.layer_sizes();
    cache->first_input_elided = true;
  }
  const auto activate = [](const DenseLayer& layer, Eigen::MatrixXd pre) {
    return layer.activation == Activation::kRelu ? Eigen::MatrixXd(pre.cwiseMax(0.0)) : pre;
  };
  const auto& layers = net.layers();
  if (cache) {
    cache->layer_inputs.emplace_back(0, first_pre.cols());
    cache->pre_activations.push_back(first_pre);
  }
  Eigen::MatrixXd h = activate(layers.front(), std::move(first_pre));
  for (std::size_t k = 1; k < layers.size(); ++k) {
    Eigen::MatrixXd pre = layers[k].weight * h;
    pre.colwise() += layers[k].bias;
    if (cache) {
      cache->layer_inputs.push_back(std::move(h));
      cache->pre_activations.push_back(pre);
    }
    h = activate(layers[k], std::move(pre));
  }
  return h;
}

Gradients Gradients::zeros_like(const DenseNet& net) {
  Gradients g;
  g.layers.reserve(net.num_layers());
  for (const auto& l : net.layers())
    g.layers.push_back({Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()),
                        Eigen::VectorXd::Zero(l.bias.size())});
  return g;
}

Gradients& Gradients::operator+=(const Gradients& other) {
  if (other.layers.size() != layers.size()) throw ShapeError("Gradients: layer count mismatch");
  for (std::size_t k = 0; k < layers.size(); ++k) {
    if (layers[k].weight.rows() != other.layers[k].weight.rows() ||
        layers[k].weight.cols() != other.layers[k].weight.cols())
      throw ShapeError("Gradients: layer shape mismatch");
    layers[k].weight += other.layers[k].weight;
    layers[k].bias += other.layers[k].bias;
  }
  return *this;
}

Gradients& Gradients::operator*=(double scale) {
  for (auto& l : layers) {
    l.weight *= scale;
    l.bias *= scale;
  }
  return *this;
}

bool Gradients::all_finite() const {
  for (const auto& l : layers)
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  return true;
}

bool Gradients::congruent_with(const DenseNet& net) const {
  if (layers.size() != net.num_layers()) return false;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto& p = net.layers()[k];
    if (layers[k].weight.rows() != p.weight.rows() || layers[k].weight.cols() != p.weight.cols() ||
        layers[k].bias.size() != p.bias.size())
      return false;
  }
  return true;
}

double Gradients::max_abs() const {
  double m = 0.0;
  for (const auto& l : layers) {
    if (l.weight.size()) m = std::max(m, l.weight.cwiseAbs().maxCoeff());
    if (l.bias.size()) m = std::max(m, l.bias.cwiseAbs().maxCoeff());
  }
  return m;
}

BackwardResult backward(const DenseNet& net, const ForwardCache& cache, const Eigen::MatrixXd& upstream) {
  if (cache.layer_inputs.size() != net.num_layers() || cache.shapes != net.layer_sizes())
    throw UsageError("backward: forward cache was produced by a different network");
  if (static_cast<std::size_t>(upstream.rows()) != net.output_size() ||
      upstream.cols() != cache.batch_size())
    throw ShapeError("backward: upstream gradient is " + std::to_string(upstream.rows()) + "x" +
                     std::to_string(upstream.cols()) + ", expected " + std::to_string(net.output_size()) +
                     "x" + std::to_string(cache.batch_size()));

  BackwardResult result;
  result.params.layers.resize(net.num_layers());
  Eigen::MatrixXd delta = upstream;
  for (std::size_t k = net.num_layers(); k-- > 0;) {
    const auto& layer = net.layers()[k];
    if (layer.activation == Activation::kRelu)
      delta = delta.cwiseProduct((cache.pre_activations[k].array() > 0.0).cast<double>().matrix());
    if (k == 0 && cache.first_input_elided) {
      result.params.layers[0].weight = Eigen::MatrixXd::Zero(layer.weight.rows(), layer.weight.cols());
      result.params.layers[0].bias = Eigen::VectorXd::Zero(layer.bias.size());
      result.first_delta = std::move(delta);
      return result;
    }
    result.params.layers[k].weight = delta * cache.layer_inputs[k].transpose();
    result.params.layers[k].bias = delta.rowwise().sum();
    if (k == 0) result.first_delta = delta;
    delta = layer.weight.transpose() * delta;
  }
  result.inputs = std::move(delta);
  return result;
}

}  // namespace deepex::nn
