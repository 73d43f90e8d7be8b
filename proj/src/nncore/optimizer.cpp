#include "deepex/nncore/optimizer.hpp"

#include <cmath>

#include "deepex/errors.hpp"

namespace deepex::nn {

void OptimizerConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw ConfigError("optimizer learning_rate must be positive and finite");
  if (kind == OptimizerKind::kAdam) {
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
      throw ConfigError("adam betas must lie in [0, 1)");
    if (!(epsilon > 0.0)) throw ConfigError("adam epsilon must be positive");
  }
}

Optimizer::Optimizer(OptimizerConfig config, const DenseNet& net) : config_(config) {
  config_.validate();
  if (config_.kind == OptimizerKind::kAdam) {
    first_moment_ = Gradients::zeros_like(net);
    second_moment_ = Gradients::zeros_like(net);
  }
}

void Optimizer::step(DenseNet& net, const Gradients& grads) {
  if (!grads.congruent_with(net)) throw ShapeError("optimizer step: gradients do not match parameters");
  if (!grads.all_finite()) throw NumericError("optimizer step: non-finite gradient");
  ++steps_;
  const double lr = config_.learning_rate;
  auto& layers = net.mutable_layers();

  if (config_.kind == OptimizerKind::kSgd) {
    for (std::size_t k = 0; k < layers.size(); ++k) {
      layers[k].weight -= lr * grads.layers[k].weight;
      layers[k].bias -= lr * grads.layers[k].bias;
    }
    return;
  }

  if (!first_moment_.congruent_with(net)) throw ShapeError("optimizer step: moments do not match parameters");
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  const double eps = config_.epsilon;
  auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  };
  for (std::size_t k = 0; k < layers.size(); ++k) {
    update(layers[k].weight, first_moment_.layers[k].weight, second_moment_.layers[k].weight,
           grads.layers[k].weight);
    update(layers[k].bias, first_moment_.layers[k].bias, second_moment_.layers[k].bias, grads.layers[k].bias);
  }
  if (!net.all_finite()) throw NumericError("optimizer step produced non-finite parameters");
}

}  // namespace deepex::nn
