#pragma once

#include <array>
#include <cstddef>
#include <set>
#include <span>
#include <vector>

#include "deepex/envs/environment.hpp"
#include "deepex/rng.hpp"

namespace deepex::envs {

enum SeqRecAction : ActionId { kA1 = 0, kA2 = 1, kNoop = 2 };

struct SeqRecUser {
  UserId id = 0;
  Eigen::VectorXd features;  // psi_u, may be empty
  double target = 10.0;      // b_u
  int budget = 10;           // tau_u
  ActionId preferred = kA2;
  std::array<double, 2> delta{0.0, 1.0};  // g(u, a1), g(u, a2)
};

struct SeqRecConfig {
  std::vector<SeqRecUser> users;

  void validate() const;
  const SeqRecUser& user(UserId id) const;
  std::size_t interact_size() const;  // max budget across users

  /// Single user, b = tau = horizon, g(a1) = 0, g(a2) = 1, no user features.
  static SeqRecConfig toy(int horizon = 10);
};

/// Per-user latent engagement state.
struct SeqRecUserState {
  double satisfaction = 0.0;  // Y
  int lifecycle_length = 0;   // L
  bool satisfied = false;
  bool leave = false;
  std::vector<ActionId> lifecycle_actions;  // actions of the current life-cycle
};

struct SeqRecState {
  std::map<UserId, SeqRecUserState> users;

  static SeqRecState initial(const SeqRecConfig& config);
};

struct SeqRecStepResult {
  SeqRecState state;
  std::map<UserId, Observation> observations;
  RewardMap rewards;
};

/// Allowed set for a SeqRec observation: {a1, a2} while engaged, {no-op} when
/// the user is leaving.
std::vector<ActionId> seqrec_constraint(const Observation& o);

/// Deterministic SeqRec transition. Engaged users: Y += g(u, a), L += 1,
/// satisfied = Y >= b, leave = satisfied or Y < 0 or L >= tau. Leaving users
/// reset to Y = 0, L = 0. Reward is the new satisfied bit. Users missing from
/// `actions` keep their state.
SeqRecStepResult seqrec_step(const SeqRecState& state, const SeqRecConfig& config, const ActionMap& actions);

/// Interaction features of the current life-cycle: length `budget`, entry i
/// (1-based) is -1 if i > L, 1 if the i-th action was a1, 0 if it was a2.
Eigen::VectorXd seqrec_interact_features(std::span<const ActionId> lifecycle_actions, std::size_t budget);

struct SpawnOptions {
  std::size_t users = 20;
  int horizon = 10;             // b_u = tau_u
  std::size_t id_offset = 0;    // first user id
  std::size_t id_slots = 0;     // one-hot width; 0 means `users`
  std::size_t preference_dims = 4;
  bool include_user_features = true;
};

/// Roster of users with half a1-preferring and half a2-preferring users (the
/// odd one out goes to a2). The preference encoding's first coordinate carries
/// the preferred action's sign, so a linear probe recovers it exactly.
SeqRecConfig multi_user_spawn(const SpawnOptions& options, Rng& rng);

/// User feature vector: one-hot id over `id_slots` (zero for ids outside the
/// range) followed by the preference encoding.
Eigen::VectorXd seqrec_user_features(UserId id, std::size_t id_slots, const Eigen::VectorXd& preference);

class SeqRecEnv final : public Environment {
 public:
  explicit SeqRecEnv(SeqRecConfig config);

  std::string name() const override { return "seqrec"; }
  std::size_t num_actions() const override { return 3; }
  std::string action_name(ActionId a) const override;

  std::vector<UserId> active_users() const override;
  Observation observe(UserId u) const override;
  double reward(const Observation& o) const override { return o.satisfied ? 1.0 : 0.0; }
  std::vector<ActionId> constraint(const Observation& o) const override { return seqrec_constraint(o); }
  ActionId rest_action() const override { return kNoop; }
  RewardMap step(const ActionMap& actions) override;

  Eigen::VectorXd user_features(UserId u) const override;
  Eigen::VectorXd action_features(ActionId a) const override;
  Eigen::VectorXd interact_features(UserId u) const override;
  std::size_t interact_size() const override { return config_.interact_size(); }

  /// Removes a user from (or returns it to) the active set.
  void set_active(UserId u, bool active);

  const SeqRecConfig& config() const { return config_; }
  const SeqRecState& state() const { return state_; }

 private:
  SeqRecConfig config_;
  SeqRecState state_;
  std::map<UserId, Observation> observations_;
  std::set<UserId> inactive_;
};

}  // namespace deepex::envs
