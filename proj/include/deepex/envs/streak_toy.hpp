#pragma once

#include "deepex/envs/environment.hpp"

namespace deepex::envs {

enum StreakAction : ActionId { kSkip = 0, kRecommend = 1 };

inline constexpr int kStreakTrigger = 10;
inline constexpr int kDisengageSteps = 100;

struct StreakState {
  int streak = 0;               // consecutive recommendations so far
  int disengaged_remaining = 0; // > 0 while the user is disengaged

  bool engaged() const { return disengaged_remaining == 0; }
};

struct StreakStepResult {
  StreakState state;
  Observation observation;
  double reward = 0.0;
};

/// c(1) = {skip, recommend}, c(0) = {skip}.
std::vector<ActionId> streak_constraint(const Observation& o);

/// Ten consecutive recommendations disengage the user; the next hundred
/// observations are 0, then the user re-engages with a fresh streak. Reward is
/// the engagement bit of the next observation.
StreakStepResult streak_step(const StreakState& state, ActionId action);

/// Single-user environment; the episode length is set by whoever drives it.
class StreakToyEnv final : public Environment {
 public:
  StreakToyEnv() = default;

  std::string name() const override { return "streak"; }
  std::size_t num_actions() const override { return 2; }
  std::string action_name(ActionId a) const override;

  std::vector<UserId> active_users() const override { return {0}; }
  Observation observe(UserId u) const override;
  double reward(const Observation& o) const override { return o.engaged ? 1.0 : 0.0; }
  std::vector<ActionId> constraint(const Observation& o) const override { return streak_constraint(o); }
  ActionId rest_action() const override { return kSkip; }
  RewardMap step(const ActionMap& actions) override;

  Eigen::VectorXd user_features(UserId u) const override;
  Eigen::VectorXd action_features(ActionId a) const override;
  /// Thermometer code of the current streak, length kStreakTrigger.
  Eigen::VectorXd interact_features(UserId u) const override;
  std::size_t interact_size() const override { return kStreakTrigger; }

  const StreakState& state() const { return state_; }

 private:
  StreakState state_;
};

}  // namespace deepex::envs
