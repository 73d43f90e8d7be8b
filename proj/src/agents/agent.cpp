#include "deepex/agents/agent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "deepex/agents/td.hpp"
#include "deepex/errors.hpp"

namespace deepex::agents {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct KindName {
  AgentKind kind;
  std::string_view name;
};

constexpr KindName kKindNames[] = {
    {AgentKind::kRandom, "random"},           {AgentKind::kGreedy, "greedy"},
    {AgentKind::kEpsilonGreedy, "epsilon_greedy"}, {AgentKind::kNeuralTs, "neural_ts"},
    {AgentKind::kNeuralUcb, "neural_ucb"},     {AgentKind::kNeuralLinUcb, "neural_linucb"},
    {AgentKind::kEnsembleDe, "ensemble_de"},   {AgentKind::kEpinetDe, "epinet_de"},
};

std::vector<std::size_t> layer_sizes(std::size_t input, const std::vector<std::size_t>& hidden) {
  std::vector<std::size_t> sizes{input};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(1);
  return sizes;
}

}  // namespace

std::string_view to_string(AgentKind kind) {
  for (const auto& k : kKindNames)
    if (k.kind == kind) return k.name;
  return "unknown";
}

AgentKind agent_kind_from_string(std::string_view name) {
  for (const auto& k : kKindNames)
    if (k.name == name) return k.kind;
  throw ConfigError("unknown agent kind '" + std::string(name) + "'");
}

void AgentConfig::validate() const {
  optimizer.validate();
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("sigma must be a finite value >= 0");
  if (target_sync < 1) throw ConfigError("target_sync must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (train_every < 1) throw ConfigError("train_every must be >= 1");
  if (buffer_capacity < 1) throw ConfigError("buffer_capacity must be >= 1");
  if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0) || !(epsilon_end >= 0.0 && epsilon_end <= 1.0))
    throw ConfigError("epsilon schedule must stay within [0, 1]");
  if (!(ucb_scale >= 0.0) || !(ts_scale >= 0.0)) throw ConfigError("exploration scales must be >= 0");
  if (!(ridge > 0.0)) throw ConfigError("ridge must be > 0");
  for (auto h : hidden)
    if (h == 0) throw ConfigError("hidden layer sizes must be positive");
  if (kind == AgentKind::kEnsembleDe && ensemble_size < 1) throw ConfigError("ensemble_size must be >= 1");
  if (kind == AgentKind::kEpinetDe) {
    if (hidden.empty()) throw ConfigError("epinet agents need at least one hidden layer");
    if (index_dim < 1 || train_indices < 1) throw ConfigError("index_dim and train_indices must be >= 1");
  }
  if (kind == AgentKind::kEnsembleDe || kind == AgentKind::kEpinetDe)
    if (!(prior_scale >= 0.0 && prior_scale < 1.0)) throw ConfigError("prior_scale must lie in [0, 1)");
  if ((kind == AgentKind::kNeuralTs || kind == AgentKind::kNeuralUcb || kind == AgentKind::kNeuralLinUcb) &&
      hidden.empty())
    throw ConfigError("last-layer exploration needs at least one hidden layer");
}

// ---------------------------------------------------------------- Q-learning

QLearningAgent::QLearningAgent(const AgentConfig& config, nn::DenseNet net, FeatureTable table, std::uint64_t seed)
    : config_(config),
      online_(std::move(net)),
      target_(online_),
      optimizer_(config.optimizer, online_),
      table_(std::move(table)),
      buffer_(config.buffer_capacity),
      act_rng_(make_rng(seed, "act")),
      train_rng_(make_rng(seed, "train")),
      last_loss_(kNaN) {
  if (online_.num_layers() >= 2) stats_ = LastLayerStats(online_.representation_size(), config_.ridge);
}

double QLearningAgent::epsilon() const {
  if (config_.epsilon_decay_steps == 0 || steps_ >= config_.epsilon_decay_steps) return config_.epsilon_end;
  const double frac = static_cast<double>(steps_) / static_cast<double>(config_.epsilon_decay_steps);
  return config_.epsilon_start + frac * (config_.epsilon_end - config_.epsilon_start);
}

Decision QLearningAgent::select(const DecisionContext& ctx) {
  Scored s;
  const auto kind = frozen_ ? AgentKind::kGreedy : config_.kind;
  switch (kind) {
    case AgentKind::kEpsilonGreedy:
      s = epsilon_greedy_select(online_, ctx.user_features, table_, ctx.interact, ctx.allowed, epsilon(), act_rng_);
      break;
    case AgentKind::kNeuralTs:
      s = neural_ts_select(online_, stats_, ctx.user_features, table_, ctx.interact, ctx.allowed, config_.ts_scale,
                           act_rng_);
      break;
    case AgentKind::kNeuralUcb:
      s = neural_ucb_select(online_, stats_, ctx.user_features, table_, ctx.interact, ctx.allowed,
                            config_.ucb_scale);
      break;
    case AgentKind::kNeuralLinUcb:
      s = neural_linucb_select(online_, stats_, ctx.user_features, table_, ctx.interact, ctx.allowed,
                               config_.ucb_scale);
      break;
    default:
      s = dqn_select(online_, ctx.user_features, table_, ctx.interact, ctx.allowed);
      break;
  }
  return Decision{s.action, std::move(s.scores), {}};
}

void QLearningAgent::store(const Transition& t) {
  if (frozen_) return;
  Transition copy = t;
  copy.reward = t.true_reward;
  if (config_.kind == AgentKind::kNeuralTs || config_.kind == AgentKind::kNeuralUcb ||
      config_.kind == AgentKind::kNeuralLinUcb) {
    const Eigen::MatrixXd x(network_input(t.user_features, t.action_features, t.interact));
    stats_.update(last_layer_features(online_, x).col(0), t.true_reward);
  }
  buffer_.push(std::move(copy));
}

void QLearningAgent::end_step() {
  if (frozen_) return;
  ++steps_;
  if (buffer_.empty() || buffer_.size() < config_.warmup || steps_ % config_.train_every != 0) return;
  for (std::size_t i = 0; i < config_.updates_per_train; ++i) {
    const auto sample = buffer_.sample(config_.batch_size, train_rng_);
    last_loss_ = td_update(online_, target_, make_td_batch(sample, table_), optimizer_);
    ++updates_;
    sync_target(target_, online_, updates_, config_.target_sync);
  }
}

// ---------------------------------------------------------------- RVF

RvfAgent::RvfAgent(const AgentConfig& config, enn::EnnParams enn, FeatureTable table, std::uint64_t seed)
    : config_(config),
      online_(std::move(enn)),
      target_(online_),
      optimizers_(enn::make_optimizers(online_, config.optimizer)),
      table_(std::move(table)),
      indices_(enn::index_spec(online_)),
      act_rng_(make_rng(seed, "act")),
      noise_rng_(make_rng(seed, "reward-noise")),
      train_rng_(make_rng(seed, "train")),
      last_loss_(kNaN) {
  const std::size_t n_buffers = std::holds_alternative<enn::EnsembleNet>(online_)
                                    ? std::get<enn::EnsembleNet>(online_).size()
                                    : 1;
  buffers_.assign(n_buffers, ReplayBuffer(config_.buffer_capacity));
}

Decision RvfAgent::select(const DecisionContext& ctx) {
  indices_.refresh(ctx.user, ctx.at_boundary, act_rng_);
  const auto z = indices_.get(ctx.user);
  auto s = rvf_select(online_, z, ctx.user_features, table_, ctx.interact, ctx.allowed);
  return Decision{s.action, std::move(s.scores), enn::index_digest(*z)};
}

void RvfAgent::store(const Transition& t) {
  if (frozen_) return;
  store_perturbed(buffers_, t, config_.sigma, noise_rng_);
}

void RvfAgent::end_step() {
  if (frozen_) return;
  ++steps_;
  if (buffers_.front().empty() || buffers_.front().size() < config_.warmup || steps_ % config_.train_every != 0)
    return;
  for (std::size_t i = 0; i < config_.updates_per_train; ++i) train_once();
}

void RvfAgent::train_once() {
  if (auto* ens = std::get_if<enn::EnsembleNet>(&online_)) {
    std::vector<TdBatch> batches;
    batches.reserve(buffers_.size());
    for (auto& b : buffers_) batches.push_back(make_td_batch(b.sample(config_.batch_size, train_rng_), table_));
    auto& target = std::get<enn::EnsembleNet>(target_);
    last_loss_ = td_update(*ens, target, batches, optimizers_);
    ++updates_;
    sync_target(target, *ens, updates_, config_.target_sync);
    return;
  }
  auto& epi = std::get<enn::EpiNet>(online_);
  auto& target = std::get<enn::EpiNet>(target_);
  const auto batch = make_td_batch(buffers_.front().sample(config_.batch_size, train_rng_), table_);
  const Eigen::MatrixXd z = enn::sample_index_batch(epi.index_dim(), config_.train_indices, train_rng_);
  last_loss_ = td_update(epi, target, batch, z, optimizers_);
  ++updates_;
  sync_target(target, epi, updates_, config_.target_sync);
}

enn::ModelParams RvfAgent::model() const {
  if (const auto* ens = std::get_if<enn::EnsembleNet>(&online_)) return *ens;
  return std::get<enn::EpiNet>(online_);
}

// ---------------------------------------------------------------- random

Decision RandomAgent::select(const DecisionContext& ctx) {
  if (ctx.allowed.empty()) throw ContractViolation("action selection with an empty allowed set");
  std::uniform_int_distribution<std::size_t> pick(0, ctx.allowed.size() - 1);
  return Decision{ctx.allowed[pick(rng_)], {}, {}};
}

enn::ModelParams RandomAgent::model() const { throw UsageError("the random agent has no parameters"); }

double RandomAgent::last_loss() const { return kNaN; }

// ---------------------------------------------------------------- factories

std::unique_ptr<Agent> make_agent(const AgentConfig& config, std::size_t input_size, FeatureTable table,
                                  std::uint64_t seed) {
  config.validate();
  if (input_size == 0) throw ConfigError("agent input size must be positive");
  Rng init = make_rng(seed, "init");
  const auto sizes = layer_sizes(input_size, config.hidden);
  switch (config.kind) {
    case AgentKind::kRandom:
      return std::make_unique<RandomAgent>(seed);
    case AgentKind::kEnsembleDe:
      return std::make_unique<RvfAgent>(
          config, enn::EnsembleNet::create(sizes, config.ensemble_size, config.prior_scale, init), std::move(table),
          seed);
    case AgentKind::kEpinetDe:
      return std::make_unique<RvfAgent>(
          config, enn::EpiNet::create(sizes, config.head_hidden, config.index_dim, config.prior_scale, init),
          std::move(table), seed);
    default:
      return std::make_unique<QLearningAgent>(config, nn::glorot_init(sizes, init), std::move(table), seed);
  }
}

std::unique_ptr<Agent> make_frozen_agent(const enn::ModelParams& model, FeatureTable table, std::uint64_t seed) {
  std::unique_ptr<Agent> agent;
  AgentConfig config;
  if (const auto* plain = std::get_if<nn::DenseNet>(&model)) {
    config.kind = AgentKind::kGreedy;
    agent = std::make_unique<QLearningAgent>(config, *plain, std::move(table), seed);
  } else if (const auto* ens = std::get_if<enn::EnsembleNet>(&model)) {
    config.kind = AgentKind::kEnsembleDe;
    agent = std::make_unique<RvfAgent>(config, *ens, std::move(table), seed);
  } else {
    config.kind = AgentKind::kEpinetDe;
    agent = std::make_unique<RvfAgent>(config, std::get<enn::EpiNet>(model), std::move(table), seed);
  }
  agent->set_frozen(true);
  return agent;
}

}  // namespace deepex::agents
