#pragma once

#include <cstdint>
#include <vector>

#include "deepex/nncore/dense_net.hpp"

namespace deepex::nn {

enum class OptimizerKind { kSgd, kAdam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

/// Update rule plus its per-parameter moments for one network.
class Optimizer {
 public:
  Optimizer() = default;
  Optimizer(OptimizerConfig config, const DenseNet& net);

  /// Applies one update. Throws NumericError on non-finite gradients and
  /// ShapeError if the gradients do not match the network.
  void step(DenseNet& net, const Gradients& grads);

  const OptimizerConfig& config() const { return config_; }
  std::int64_t step_count() const { return steps_; }

 private:
  OptimizerConfig config_;
  Gradients first_moment_;
  Gradients second_moment_;
  std::int64_t steps_ = 0;
};

}  // namespace deepex::nn
