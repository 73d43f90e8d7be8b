#include "deepex/agents/transition.hpp"

#include <string>

#include "deepex/errors.hpp"

namespace deepex::agents {

FeatureTable::FeatureTable(std::vector<Eigen::VectorXd> features) : features_(std::move(features)) {
  if (features_.empty()) throw ConfigError("feature table is empty");
  dim_ = static_cast<std::size_t>(features_.front().size());
  for (const auto& f : features_)
    if (static_cast<std::size_t>(f.size()) != dim_) throw ShapeError("action features must share one dimension");
}

FeatureTable FeatureTable::from_environment(const envs::Environment& env) {
  std::vector<Eigen::VectorXd> f;
  for (std::size_t a = 0; a < env.num_actions(); ++a) f.push_back(env.action_features(static_cast<ActionId>(a)));
  return FeatureTable(std::move(f));
}

const Eigen::VectorXd& FeatureTable::operator[](ActionId a) const {
  if (a < 0 || static_cast<std::size_t>(a) >= features_.size())
    throw UsageError("no action features for action " + std::to_string(a));
  return features_[static_cast<std::size_t>(a)];
}

Eigen::VectorXd network_input(const Eigen::VectorXd& user, const Eigen::VectorXd& action,
                              const Eigen::VectorXd& interact) {
  Eigen::VectorXd x(user.size() + action.size() + interact.size());
  x << user, action, interact;
  return x;
}

Eigen::MatrixXd candidate_inputs(const Eigen::VectorXd& user, const FeatureTable& table,
                                 const Eigen::VectorXd& interact, std::span<const ActionId> allowed) {
  const Eigen::Index d = user.size() + static_cast<Eigen::Index>(table.dim()) + interact.size();
  Eigen::MatrixXd x(d, static_cast<Eigen::Index>(allowed.size()));
  for (std::size_t j = 0; j < allowed.size(); ++j)
    x.col(static_cast<Eigen::Index>(j)) = network_input(user, table[allowed[j]], interact);
  return x;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw ConfigError("replay buffer capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
    return;
  }
  items_[head_] = std::move(t);
  head_ = (head_ + 1) % capacity_;
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t count, Rng& rng) const {
  if (items_.empty()) throw UsageError("cannot sample from an empty replay buffer");
  std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
  std::vector<const Transition*> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(&items_[pick(rng)]);
  return out;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= items_.size()) throw UsageError("replay buffer index out of range");
  return items_[(head_ + i) % items_.size()];
}

}  // namespace deepex::agents
