#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "deepex/agents/transition.hpp"
#include "deepex/enn/enn.hpp"
#include "deepex/nncore/dense_net.hpp"

namespace deepex::agents {

/// Argmax of `scores` over `allowed` (parallel arrays). Ties go to the lowest
/// action id.
ActionId argmax_action(std::span<const ActionId> allowed, const Eigen::VectorXd& scores);

struct Scored {
  ActionId action = 0;
  Eigen::VectorXd scores;  // one entry per allowed action
};

/// Greedy action of a plain Q-network.
Scored dqn_select(const nn::DenseNet& q, const Eigen::VectorXd& user, const FeatureTable& table,
                  const Eigen::VectorXd& interact, std::span<const ActionId> allowed);

/// Uniform over `allowed` with probability epsilon, greedy otherwise.
Scored epsilon_greedy_select(const nn::DenseNet& q, const Eigen::VectorXd& user, const FeatureTable& table,
                             const Eigen::VectorXd& interact, std::span<const ActionId> allowed, double epsilon,
                             Rng& rng);

/// Greedy action of the value function sampled by index z. Throws UsageError
/// when z is unset.
Scored rvf_select(const enn::EnnParams& enn, const std::optional<enn::EpistemicIndex>& z,
                  const Eigen::VectorXd& user, const FeatureTable& table, const Eigen::VectorXd& interact,
                  std::span<const ActionId> allowed);

/// Ridge statistics over last-layer features: A = lambda I + sum phi phi^T,
/// its inverse kept by Sherman-Morrison updates, and the response sum_i r_i phi_i.
class LastLayerStats {
 public:
  LastLayerStats() = default;
  LastLayerStats(std::size_t dim, double ridge);

  /// phi^T A^{-1} phi.
  double variance(const Eigen::VectorXd& phi) const;
  /// A^{-1} times the response vector.
  Eigen::VectorXd theta() const { return inverse_ * response_; }

  void update(const Eigen::VectorXd& phi, double reward);

  std::size_t dim() const { return static_cast<std::size_t>(covariance_.rows()); }
  double ridge() const { return ridge_; }
  const Eigen::MatrixXd& covariance() const { return covariance_; }
  const Eigen::MatrixXd& inverse() const { return inverse_; }
  const Eigen::VectorXd& response() const { return response_; }

 private:
  double ridge_ = 1.0;
  Eigen::MatrixXd covariance_;
  Eigen::MatrixXd inverse_;
  Eigen::VectorXd response_;
};

/// Last-hidden representations of the candidate inputs (one column each).
Eigen::MatrixXd last_layer_features(const nn::DenseNet& q, const Eigen::MatrixXd& inputs);

/// Per action: sample Normal(Q, nu^2 phi^T A^{-1} phi), take the argmax.
Scored neural_ts_select(const nn::DenseNet& q, const LastLayerStats& stats, const Eigen::VectorXd& user,
                        const FeatureTable& table, const Eigen::VectorXd& interact,
                        std::span<const ActionId> allowed, double nu, Rng& rng);

/// argmax Q + scale * sqrt(phi^T A^{-1} phi).
Scored neural_ucb_select(const nn::DenseNet& q, const LastLayerStats& stats, const Eigen::VectorXd& user,
                         const FeatureTable& table, const Eigen::VectorXd& interact,
                         std::span<const ActionId> allowed, double scale);

/// argmax theta^T phi + scale * sqrt(phi^T A^{-1} phi) with the ridge head
/// theta fit on observed immediate rewards.
Scored neural_linucb_select(const nn::DenseNet& q, const LastLayerStats& stats, const Eigen::VectorXd& user,
                            const FeatureTable& table, const Eigen::VectorXd& interact,
                            std::span<const ActionId> allowed, double scale);

/// Per-user epistemic index held for the length of a life-cycle.
class LifecycleIndexStore {
 public:
  explicit LifecycleIndexStore(enn::IndexSpec spec) : spec_(spec) {}

  /// Samples a fresh index if the user has none or is at a life-cycle
  /// boundary; otherwise keeps the current one. Returns true on resample.
  bool refresh(UserId user, bool at_boundary, Rng& rng);

  const std::optional<enn::EpistemicIndex> get(UserId user) const;
  std::size_t resample_count() const { return resamples_; }

 private:
  enn::IndexSpec spec_;
  std::map<UserId, enn::EpistemicIndex> indices_;
  std::size_t resamples_ = 0;
};

/// Stores one perturbed copy of `t` per buffer, each with its own noise draw
/// W ~ N(0, sigma^2) added to the true reward. An EpiNet agent passes a single
/// buffer, an ensemble agent one buffer per particle. Returns the draws.
std::vector<double> store_perturbed(std::span<ReplayBuffer> buffers, const Transition& t, double sigma, Rng& rng);

}  // namespace deepex::agents
