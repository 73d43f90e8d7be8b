#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "deepex/envs/environment.hpp"
#include "deepex/rng.hpp"

namespace deepex::agents {

using envs::ActionId;
using envs::UserId;

/// One stored learning sample (psi_u, phi_a, xi_t, reward, xi_{t+1}, A_{t+1}).
struct Transition {
  Eigen::VectorXd user_features;
  Eigen::VectorXd action_features;
  Eigen::VectorXd interact;
  ActionId action = 0;
  double reward = 0.0;       // possibly perturbed
  double true_reward = 0.0;  // as observed
  Eigen::VectorXd next_interact;
  std::vector<ActionId> next_allowed;
  bool terminal = false;  // next_allowed is the rest action alone
};

/// Action feature vectors phi_a indexed by action id.
class FeatureTable {
 public:
  FeatureTable() = default;
  explicit FeatureTable(std::vector<Eigen::VectorXd> features);
  static FeatureTable from_environment(const envs::Environment& env);

  const Eigen::VectorXd& operator[](ActionId a) const;
  std::size_t size() const { return features_.size(); }
  std::size_t dim() const { return dim_; }

 private:
  std::vector<Eigen::VectorXd> features_;
  std::size_t dim_ = 0;
};

/// Value-network input [psi_u; phi_a; xi].
Eigen::VectorXd network_input(const Eigen::VectorXd& user, const Eigen::VectorXd& action,
                              const Eigen::VectorXd& interact);

/// One input column per allowed action, in the order of `allowed`.
Eigen::MatrixXd candidate_inputs(const Eigen::VectorXd& user, const FeatureTable& table,
                                 const Eigen::VectorXd& interact, std::span<const ActionId> allowed);

/// Fixed-capacity ring of transitions with FIFO eviction and uniform sampling
/// (with replacement).
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::vector<const Transition*> sample(std::size_t count, Rng& rng) const;

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return items_.empty(); }
  /// i-th oldest transition still held.
  const Transition& at(std::size_t i) const;

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // slot of the oldest item once full
  std::vector<Transition> items_;
};

}  // namespace deepex::agents
