#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "deepex/enn/index.hpp"
#include "deepex/nncore/dense_net.hpp"
#include "deepex/nncore/optimizer.hpp"

namespace deepex::enn {

inline constexpr double kDefaultPriorScale = 0.3;

/// M trainable networks, each paired with a frozen additive prior network:
/// h(x, m) = f_base_m(x) + prior_scale * f_prior_m(x).
class EnsembleNet {
 public:
  EnsembleNet(std::vector<nn::DenseNet> base, std::vector<nn::DenseNet> priors, double prior_scale);

  /// Base and prior networks share `layer_sizes`; all Glorot-initialized.
  static EnsembleNet create(std::span<const std::size_t> layer_sizes, std::size_t ensemble_size,
                            double prior_scale, Rng& rng);

  std::size_t size() const { return base_.size(); }
  std::size_t input_size() const { return base_.front().input_size(); }
  double prior_scale() const { return prior_scale_; }

  const nn::DenseNet& base(std::size_t m) const { return base_.at(m); }
  const nn::DenseNet& prior(std::size_t m) const { return priors_.at(m); }
  std::vector<nn::DenseNet>& trainable() { return base_; }
  const std::vector<nn::DenseNet>& trainable() const { return base_; }

  /// Checksum over all prior networks. Equal to the value taken at
  /// construction for the lifetime of the object.
  std::uint64_t prior_checksum() const;
  bool priors_intact() const { return prior_checksum() == prior_checksum_at_init_; }

  /// Values of particle m for a batch of inputs (columns of `inputs`).
  Eigen::VectorXd forward(const Eigen::MatrixXd& inputs, std::size_t particle) const;
  double forward(const Eigen::VectorXd& x, std::size_t particle) const;

  /// Gradient of sum_b upstream[b] * h(x_b, m) with respect to base_m only.
  nn::Gradients particle_gradient(const Eigen::MatrixXd& inputs, std::size_t particle,
                                  const Eigen::VectorXd& upstream) const;

  /// Same as above, given the forward pass already done.
  struct Pass {
    std::size_t particle = 0;
    nn::ForwardCache base_cache;
    Eigen::VectorXd values;
  };
  Pass run(const Eigen::MatrixXd& inputs, std::size_t particle) const;
  nn::Gradients gradient(const Pass& pass, const Eigen::VectorXd& upstream) const;

  /// Overwrites the trainable networks with those of `other` (target sync).
  void copy_trainable_from(const EnsembleNet& other);

 private:
  std::vector<nn::DenseNet> base_;
  std::vector<nn::DenseNet> priors_;
  double prior_scale_;
  std::uint64_t prior_checksum_at_init_ = 0;
};

/// Base network plus an epistemic head:
/// h(x, z) = f(x) + (g(sg[s(x)], z) + prior_scale * g_p(sg[s(x)], z))^T z
/// where s(x) is the last hidden representation of f and sg blocks gradients.
class EpiNet {
 public:
  EpiNet(nn::DenseNet base, nn::DenseNet head, nn::DenseNet prior_head, double prior_scale,
         std::size_t index_dim);

  /// `base_sizes` must contain at least one hidden layer. Heads map
  /// (representation + index_dim) -> head_hidden... -> index_dim.
  static EpiNet create(std::span<const std::size_t> base_sizes, std::span<const std::size_t> head_hidden,
                       std::size_t index_dim, double prior_scale, Rng& rng);

  std::size_t input_size() const { return base_.input_size(); }
  std::size_t index_dim() const { return index_dim_; }
  std::size_t representation_size() const { return base_.representation_size(); }
  double prior_scale() const { return prior_scale_; }

  const nn::DenseNet& base() const { return base_; }
  const nn::DenseNet& head() const { return head_; }
  const nn::DenseNet& prior_head() const { return prior_head_; }
  nn::DenseNet& mutable_base() { return base_; }
  nn::DenseNet& mutable_head() { return head_; }

  std::uint64_t prior_checksum() const { return prior_head_.checksum(); }
  bool priors_intact() const { return prior_checksum() == prior_checksum_at_init_; }

  struct Pass {
    nn::ForwardCache base_cache;
    nn::ForwardCache head_cache;
    Eigen::MatrixXd indices;  // d_z x K
    Eigen::MatrixXd values;   // B x K
  };

  /// Values for every (input, index) pair: B x K for B input columns and K
  /// index columns.
  Pass run(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& indices) const;
  Eigen::MatrixXd forward(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& indices) const;
  double forward(const Eigen::VectorXd& x, const Eigen::VectorXd& z) const;

  struct Gradient {
    nn::Gradients base;
    nn::Gradients head;
  };
  /// Gradient of sum_{b,k} upstream(b,k) * h(x_b, z_k) with respect to the base
  /// network and the learnable head. The representation fed to both heads is
  /// treated as a constant.
  Gradient gradient(const Pass& pass, const Eigen::MatrixXd& upstream) const;

  void copy_trainable_from(const EpiNet& other);

 private:

  nn::DenseNet base_;
  nn::DenseNet head_;
  nn::DenseNet prior_head_;
  double prior_scale_;
  std::size_t index_dim_;
  std::uint64_t prior_checksum_at_init_ = 0;
};

using EnnParams = std::variant<EnsembleNet, EpiNet>;

IndexSpec index_spec(const EnnParams& params);
std::size_t input_size(const EnnParams& params);

/// Single-input sample value h(x, z). Throws UsageError if the index kind does
/// not match the network kind.
double enn_forward(const EnnParams& params, const Eigen::VectorXd& x, const EpistemicIndex& z);

/// Values of several inputs (columns) under one index.
Eigen::VectorXd enn_forward_batch(const EnnParams& params, const Eigen::MatrixXd& inputs,
                                  const EpistemicIndex& z);

/// Gradients over trainable networks only, in the order of trainable_nets():
/// ensemble -> base_0..base_{M-1}; epinet -> [base, head].
std::vector<nn::Gradients> enn_grad(const EnnParams& params, const Eigen::VectorXd& x,
                                    const EpistemicIndex& z, double upstream);

std::vector<nn::DenseNet*> trainable_nets(EnnParams& params);
std::vector<const nn::DenseNet*> trainable_nets(const EnnParams& params);

bool priors_intact(const EnnParams& params);
std::uint64_t prior_checksum(const EnnParams& params);
std::uint64_t trainable_checksum(const EnnParams& params);

/// One optimizer per trainable network.
std::vector<nn::Optimizer> make_optimizers(const EnnParams& params, const nn::OptimizerConfig& config);

}  // namespace deepex::enn
