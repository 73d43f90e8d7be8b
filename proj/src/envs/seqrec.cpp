#include "deepex/envs/seqrec.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "deepex/errors.hpp"

namespace deepex::envs {

void SeqRecConfig::validate() const {
  if (users.empty()) throw ConfigError("seqrec roster is empty");
  std::set<UserId> seen;
  std::size_t feature_dim = users.front().features.size();
  for (const auto& u : users) {
    if (!seen.insert(u.id).second) throw ConfigError("seqrec roster has duplicate user id " + std::to_string(u.id));
    if (u.budget < 1) throw ConfigError("seqrec user " + std::to_string(u.id) + ": budget must be >= 1");
    if (!(u.target > 0.0)) throw ConfigError("seqrec user " + std::to_string(u.id) + ": target must be > 0");
    if (u.preferred != kA1 && u.preferred != kA2)
      throw ConfigError("seqrec user " + std::to_string(u.id) + ": preferred action must be a1 or a2");
    if (static_cast<std::size_t>(u.features.size()) != feature_dim)
      throw ConfigError("seqrec users must share one feature dimension");
    if (!u.features.allFinite()) throw ConfigError("seqrec user features must be finite");
  }
}

const SeqRecUser& SeqRecConfig::user(UserId id) const {
  for (const auto& u : users)
    if (u.id == id) return u;
  throw UsageError("unknown seqrec user " + std::to_string(id));
}

std::size_t SeqRecConfig::interact_size() const {
  int m = 0;
  for (const auto& u : users) m = std::max(m, u.budget);
  return static_cast<std::size_t>(m);
}

SeqRecConfig SeqRecConfig::toy(int horizon) {
  SeqRecUser u;
  u.id = 0;
  u.target = horizon;
  u.budget = horizon;
  u.preferred = kA2;
  u.delta = {0.0, 1.0};
  return SeqRecConfig{{u}};
}

SeqRecState SeqRecState::initial(const SeqRecConfig& config) {
  SeqRecState s;
  for (const auto& u : config.users) s.users[u.id] = SeqRecUserState{};
  return s;
}

std::vector<ActionId> seqrec_constraint(const Observation& o) {
  if (o.leave) return {kNoop};
  return {kA1, kA2};
}

SeqRecStepResult seqrec_step(const SeqRecState& state, const SeqRecConfig& config, const ActionMap& actions) {
  SeqRecStepResult result;
  result.state = state;
  for (const auto& [id, action] : actions) {
    auto it = result.state.users.find(id);
    if (it == result.state.users.end()) throw UsageError("seqrec_step: unknown user " + std::to_string(id));
    auto& s = it->second;
    const Observation current{s.satisfied, s.leave, true};
    const auto allowed = seqrec_constraint(current);
    if (std::find(allowed.begin(), allowed.end(), action) == allowed.end())
      throw ContractViolation("seqrec_step: action " + std::to_string(action) + " not allowed for user " +
                              std::to_string(id));
    if (s.leave) {
      s = SeqRecUserState{};
    } else {
      const auto& user = config.user(id);
      s.satisfaction += user.delta[static_cast<std::size_t>(action)];
      s.lifecycle_length += 1;
      s.lifecycle_actions.push_back(action);
      s.satisfied = s.satisfaction >= user.target;
      s.leave = s.satisfied || s.satisfaction < 0.0 || s.lifecycle_length >= user.budget;
    }
    result.observations[id] = Observation{s.satisfied, s.leave, true};
    result.rewards[id] = s.satisfied ? 1.0 : 0.0;
  }
  return result;
}

Eigen::VectorXd seqrec_interact_features(std::span<const ActionId> lifecycle_actions, std::size_t budget) {
  Eigen::VectorXd xi = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(budget), -1.0);
  const std::size_t n = std::min(budget, lifecycle_actions.size());
  for (std::size_t i = 0; i < n; ++i) xi[static_cast<Eigen::Index>(i)] = lifecycle_actions[i] == kA1 ? 1.0 : 0.0;
  return xi;
}

Eigen::VectorXd seqrec_user_features(UserId id, std::size_t id_slots, const Eigen::VectorXd& preference) {
  Eigen::VectorXd psi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(id_slots) + preference.size());
  if (id < id_slots) psi[static_cast<Eigen::Index>(id)] = 1.0;
  psi.tail(preference.size()) = preference;
  return psi;
}

SeqRecConfig multi_user_spawn(const SpawnOptions& options, Rng& rng) {
  if (options.users == 0) throw ConfigError("multi_user_spawn needs at least one user");
  if (options.horizon < 1) throw ConfigError("multi_user_spawn horizon must be >= 1");
  if (options.preference_dims == 0) throw ConfigError("preference encoding needs at least one dimension");

  std::vector<ActionId> labels(options.users, kA2);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(options.users / 2), kA1);
  std::shuffle(labels.begin(), labels.end(), rng);

  const std::size_t slots = options.id_slots ? options.id_slots : options.users;
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> magnitude(0.5, 1.0);

  SeqRecConfig config;
  for (std::size_t i = 0; i < options.users; ++i) {
    SeqRecUser u;
    u.id = options.id_offset + i;
    u.target = options.horizon;
    u.budget = options.horizon;
    u.preferred = labels[i];
    u.delta = labels[i] == kA1 ? std::array<double, 2>{1.0, 0.0} : std::array<double, 2>{0.0, 1.0};
    Eigen::VectorXd pref(static_cast<Eigen::Index>(options.preference_dims));
    for (Eigen::Index k = 0; k < pref.size(); ++k) pref[k] = unit(rng);
    pref[0] = (labels[i] == kA1 ? 1.0 : -1.0) * magnitude(rng);
    if (options.include_user_features) u.features = seqrec_user_features(u.id, slots, pref);
    config.users.push_back(std::move(u));
  }
  config.validate();
  return config;
}

SeqRecEnv::SeqRecEnv(SeqRecConfig config) : config_(std::move(config)) {
  config_.validate();
  state_ = SeqRecState::initial(config_);
  for (const auto& u : config_.users) observations_[u.id] = Observation{};
}

std::string SeqRecEnv::action_name(ActionId a) const {
  switch (a) {
    case kA1: return "a1";
    case kA2: return "a2";
    case kNoop: return "no-op";
    default: throw UsageError("unknown seqrec action " + std::to_string(a));
  }
}

std::vector<UserId> SeqRecEnv::active_users() const {
  std::vector<UserId> ids;
  for (const auto& [id, _] : state_.users)
    if (!inactive_.contains(id)) ids.push_back(id);
  return ids;
}

Observation SeqRecEnv::observe(UserId u) const {
  if (inactive_.contains(u) || !observations_.contains(u))
    throw UsageError("user " + std::to_string(u) + " is not active");
  return observations_.at(u);
}

RewardMap SeqRecEnv::step(const ActionMap& actions) {
  for (const auto& [id, _] : actions)
    if (inactive_.contains(id)) throw UsageError("action for inactive user " + std::to_string(id));
  auto result = seqrec_step(state_, config_, actions);
  state_ = std::move(result.state);
  for (const auto& [id, obs] : result.observations) observations_[id] = obs;
  return result.rewards;
}

Eigen::VectorXd SeqRecEnv::user_features(UserId u) const { return config_.user(u).features; }

Eigen::VectorXd SeqRecEnv::action_features(ActionId a) const {
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(2);
  if (a == kA1 || a == kA2) phi[a] = 1.0;
  return phi;
}

Eigen::VectorXd SeqRecEnv::interact_features(UserId u) const {
  const auto& s = state_.users.at(u);
  return seqrec_interact_features(s.lifecycle_actions, interact_size());
}

void SeqRecEnv::set_active(UserId u, bool active) {
  if (!state_.users.contains(u)) throw UsageError("unknown seqrec user " + std::to_string(u));
  if (active) {
    inactive_.erase(u);
  } else {
    inactive_.insert(u);
  }
}

}  // namespace deepex::envs
