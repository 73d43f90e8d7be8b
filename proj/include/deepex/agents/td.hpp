#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "deepex/agents/transition.hpp"
#include "deepex/enn/enn.hpp"
#include "deepex/nncore/optimizer.hpp"

namespace deepex::agents {

/// A sampled minibatch laid out for batched evaluation.
struct TdBatch {
  Eigen::MatrixXd inputs;                 // d x B, (psi, phi_a, xi)
  Eigen::VectorXd rewards;                // B, perturbed
  Eigen::MatrixXd next_inputs;            // d x C, every allowed next action
  std::vector<Eigen::Index> next_owner;   // C, batch column each candidate belongs to
  std::vector<bool> terminal;             // B

  Eigen::Index size() const { return inputs.cols(); }
};

TdBatch make_td_batch(std::span<const Transition* const> transitions, const FeatureTable& table);

/// Undiscounted TD targets r + max_{a in A'} value(next, a), with 0 bootstrap
/// for terminal transitions. `next_values` is C x K (one column per index).
Eigen::MatrixXd td_targets(const TdBatch& batch, const Eigen::MatrixXd& next_values);

// Plain Q-network: loss = sum_b (target_b - Q(x_b))^2.
double td_loss(const nn::DenseNet& online, const nn::DenseNet& target, const TdBatch& batch);
nn::Gradients td_gradient(const nn::DenseNet& online, const nn::DenseNet& target, const TdBatch& batch);
double td_update(nn::DenseNet& online, const nn::DenseNet& target, const TdBatch& batch, nn::Optimizer& optimizer);

// Ensemble: particle m is trained on its own batch (its own perturbed buffer)
// with loss sum_m sum_b (target_{m,b} - h(x_b, m))^2.
double td_loss(const enn::EnsembleNet& online, const enn::EnsembleNet& target, std::span<const TdBatch> batches);
std::vector<nn::Gradients> td_gradient(const enn::EnsembleNet& online, const enn::EnsembleNet& target,
                                       std::span<const TdBatch> batches);
double td_update(enn::EnsembleNet& online, const enn::EnsembleNet& target, std::span<const TdBatch> batches,
                 std::span<nn::Optimizer> optimizers);

// EpiNet: loss = sum_k sum_b (target_{b,k} - h(x_b, z_k))^2 over the columns z_k
// of `indices`, with one shared perturbed reward per transition.
double td_loss(const enn::EpiNet& online, const enn::EpiNet& target, const TdBatch& batch,
               const Eigen::MatrixXd& indices);
std::vector<nn::Gradients> td_gradient(const enn::EpiNet& online, const enn::EpiNet& target, const TdBatch& batch,
                                       const Eigen::MatrixXd& indices);
double td_update(enn::EpiNet& online, const enn::EpiNet& target, const TdBatch& batch,
                 const Eigen::MatrixXd& indices, std::span<nn::Optimizer> optimizers);

/// Copies online parameters into the target when `update_count` is a multiple
/// of `period`. Returns true if it copied.
bool sync_target(nn::DenseNet& target, const nn::DenseNet& online, std::size_t update_count, std::size_t period);
bool sync_target(enn::EnsembleNet& target, const enn::EnsembleNet& online, std::size_t update_count,
                 std::size_t period);
bool sync_target(enn::EpiNet& target, const enn::EpiNet& online, std::size_t update_count, std::size_t period);

}  // namespace deepex::agents
