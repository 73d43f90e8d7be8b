#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "deepex/nncore/dense_net.hpp"

namespace deepex::testing {

inline constexpr double kFdStep = 1e-5;

/// Flattens gradients in layer order: weight (column-major) then bias.
inline Eigen::VectorXd flatten(const nn::Gradients& g) {
  std::vector<double> out;
  for (const auto& l : g.layers) {
    out.insert(out.end(), l.weight.data(), l.weight.data() + l.weight.size());
    out.insert(out.end(), l.bias.data(), l.bias.data() + l.bias.size());
  }
  return Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(out.size()));
}

/// Central differences of `loss` with respect to every parameter of `net`,
/// in the same order as flatten().
inline Eigen::VectorXd numeric_gradient(nn::DenseNet& net, const std::function<double()>& loss) {
  std::vector<double> out;
  for (auto& layer : net.mutable_layers()) {
    const auto probe = [&](double* p) {
      const double saved = *p;
      *p = saved + kFdStep;
      const double up = loss();
      *p = saved - kFdStep;
      const double down = loss();
      *p = saved;
      out.push_back((up - down) / (2 * kFdStep));
    };
    for (Eigen::Index i = 0; i < layer.weight.size(); ++i) probe(layer.weight.data() + i);
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) probe(layer.bias.data() + i);
  }
  return Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(out.size()));
}

/// Smallest |pre-activation| over the rectified layers of a cached forward
/// pass. Central differences are only a valid oracle away from the kinks, so
/// instances closer than kKinkMargin are redrawn.
inline constexpr double kKinkMargin = 1e-3;

inline double min_hidden_preactivation(const nn::ForwardCache& cache) {
  double out = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < cache.pre_activations.size(); ++k)
    out = std::min(out, cache.pre_activations[k].cwiseAbs().minCoeff());
  return out;
}

/// Norm-wise relative error; 0 when both vectors vanish.
inline double relative_error(const Eigen::VectorXd& analytic, const Eigen::VectorXd& numeric) {
  const double scale = std::max(analytic.norm(), numeric.norm());
  if (scale == 0.0) return 0.0;
  return (analytic - numeric).norm() / scale;
}

}  // namespace deepex::testing
