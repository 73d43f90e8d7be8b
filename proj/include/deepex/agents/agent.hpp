#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "deepex/agents/selection.hpp"
#include "deepex/agents/transition.hpp"
#include "deepex/enn/checkpoint.hpp"
#include "deepex/nncore/optimizer.hpp"

namespace deepex::agents {

enum class AgentKind {
  kRandom,
  kGreedy,  // deep Q-learning without exploration
  kEpsilonGreedy,
  kNeuralTs,
  kNeuralUcb,
  kNeuralLinUcb,
  kEnsembleDe,
  kEpinetDe,
};

std::string_view to_string(AgentKind kind);
AgentKind agent_kind_from_string(std::string_view name);

struct AgentConfig {
  AgentKind kind = AgentKind::kEpinetDe;
  std::vector<std::size_t> hidden{20};
  nn::OptimizerConfig optimizer;

  double sigma = 0.1;                // reward perturbation std
  std::size_t target_sync = 100;     // K, in gradient updates
  std::size_t batch_size = 64;
  std::size_t warmup = 200;          // transitions before training starts
  std::size_t train_every = 1;       // environment steps between training rounds
  std::size_t updates_per_train = 1;
  std::size_t buffer_capacity = 100000;

  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  std::size_t epsilon_decay_steps = 0;  // environment steps; 0 = half the run (set by the harness)

  double ucb_scale = 1.0;
  double ts_scale = 1.0;  // nu
  double ridge = 1.0;     // lambda

  std::size_t ensemble_size = 10;
  double prior_scale = 0.3;
  std::size_t index_dim = 10;
  std::size_t train_indices = 50;
  std::vector<std::size_t> head_hidden{16};

  void validate() const;
};

/// What the agent is told about one active user when it has to act.
struct DecisionContext {
  std::size_t t = 0;
  UserId user = 0;
  Eigen::VectorXd user_features;
  Eigen::VectorXd interact;
  std::vector<ActionId> allowed;
  bool at_boundary = false;  // allowed is the rest action alone
};

struct Decision {
  ActionId action = 0;
  Eigen::VectorXd scores;     // per allowed action, empty for the random agent
  std::string index_digest;   // RVF agents only
};

class Agent {
 public:
  virtual ~Agent() = default;

  virtual AgentKind kind() const = 0;
  virtual Decision select(const DecisionContext& ctx) = 0;

  /// Hands over one observed transition carrying the true reward. Agents
  /// perturb rewards and update their own statistics here.
  virtual void store(const Transition& t) = 0;

  /// Called once per environment step after all users acted; runs training.
  virtual void end_step() = 0;

  /// Disables exploration knobs, storage and training (frozen evaluation). RVF
  /// agents keep sampling a fresh index per life-cycle.
  virtual void set_frozen(bool frozen) = 0;

  virtual enn::ModelParams model() const = 0;

  /// Last TD loss, NaN before any training.
  virtual double last_loss() const = 0;
  virtual std::size_t update_count() const = 0;
};

/// Builds an agent for inputs of width `input_size` = |psi| + |phi| + |xi|.
std::unique_ptr<Agent> make_agent(const AgentConfig& config, std::size_t input_size, FeatureTable table,
                                  std::uint64_t seed);

/// Frozen greedy agent around checkpointed parameters.
std::unique_ptr<Agent> make_frozen_agent(const enn::ModelParams& model, FeatureTable table, std::uint64_t seed);

// Concrete agents are exposed for tests that need to reach into them.

/// Deep Q-learning with one of the myopic exploration rules.
class QLearningAgent final : public Agent {
 public:
  QLearningAgent(const AgentConfig& config, nn::DenseNet net, FeatureTable table, std::uint64_t seed);

  AgentKind kind() const override { return config_.kind; }
  Decision select(const DecisionContext& ctx) override;
  void store(const Transition& t) override;
  void end_step() override;
  void set_frozen(bool frozen) override { frozen_ = frozen; }
  enn::ModelParams model() const override { return online_; }
  double last_loss() const override { return last_loss_; }
  std::size_t update_count() const override { return updates_; }

  double epsilon() const;
  const nn::DenseNet& online() const { return online_; }
  const nn::DenseNet& target() const { return target_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  const LastLayerStats& stats() const { return stats_; }

 private:
  AgentConfig config_;
  nn::DenseNet online_;
  nn::DenseNet target_;
  nn::Optimizer optimizer_;
  FeatureTable table_;
  ReplayBuffer buffer_;
  LastLayerStats stats_;
  Rng act_rng_;
  Rng train_rng_;
  std::size_t steps_ = 0;
  std::size_t updates_ = 0;
  double last_loss_;
  bool frozen_ = false;
};

/// Randomized value functions over an epistemic network: one index per user
/// life-cycle, greedy within it, perturbed rewards, TD over a set of indices.
class RvfAgent final : public Agent {
 public:
  RvfAgent(const AgentConfig& config, enn::EnnParams enn, FeatureTable table, std::uint64_t seed);

  AgentKind kind() const override { return config_.kind; }
  Decision select(const DecisionContext& ctx) override;
  void store(const Transition& t) override;
  void end_step() override;
  void set_frozen(bool frozen) override { frozen_ = frozen; }
  enn::ModelParams model() const override;
  double last_loss() const override { return last_loss_; }
  std::size_t update_count() const override { return updates_; }

  const enn::EnnParams& online() const { return online_; }
  const enn::EnnParams& target() const { return target_; }
  const std::vector<ReplayBuffer>& buffers() const { return buffers_; }
  const LifecycleIndexStore& indices() const { return indices_; }

 private:
  void train_once();

  AgentConfig config_;
  enn::EnnParams online_;
  enn::EnnParams target_;
  std::vector<nn::Optimizer> optimizers_;
  FeatureTable table_;
  std::vector<ReplayBuffer> buffers_;
  LifecycleIndexStore indices_;
  Rng act_rng_;
  Rng noise_rng_;
  Rng train_rng_;
  std::size_t steps_ = 0;
  std::size_t updates_ = 0;
  double last_loss_;
  bool frozen_ = false;
};

/// Uniform over the allowed set; never learns.
class RandomAgent final : public Agent {
 public:
  explicit RandomAgent(std::uint64_t seed) : rng_(make_rng(seed, "random-agent")) {}

  AgentKind kind() const override { return AgentKind::kRandom; }
  Decision select(const DecisionContext& ctx) override;
  void store(const Transition&) override {}
  void end_step() override {}
  void set_frozen(bool) override {}
  enn::ModelParams model() const override;
  double last_loss() const override;
  std::size_t update_count() const override { return 0; }

 private:
  Rng rng_;
};

}  // namespace deepex::agents
