#include "deepex/envs/streak_toy.hpp"

#include <string>

#include "deepex/errors.hpp"

namespace deepex::envs {

std::vector<ActionId> streak_constraint(const Observation& o) {
  if (o.engaged) return {kSkip, kRecommend};
  return {kSkip};
}

StreakStepResult streak_step(const StreakState& state, ActionId action) {
  if (action != kSkip && action != kRecommend)
    throw ContractViolation("streak_step: unknown action " + std::to_string(action));
  StreakStepResult r;
  r.state = state;
  auto& s = r.state;
  if (!state.engaged()) {
    if (action != kSkip) throw ContractViolation("streak_step: recommend while the user is disengaged");
    --s.disengaged_remaining;
  } else if (action == kRecommend) {
    if (++s.streak >= kStreakTrigger) {
      s.streak = 0;
      s.disengaged_remaining = kDisengageSteps;
    }
  } else {
    s.streak = 0;
  }
  r.observation.engaged = s.engaged();
  r.reward = r.observation.engaged ? 1.0 : 0.0;
  return r;
}

std::string StreakToyEnv::action_name(ActionId a) const {
  switch (a) {
    case kSkip: return "skip";
    case kRecommend: return "recommend";
    default: throw UsageError("unknown streak action " + std::to_string(a));
  }
}

Observation StreakToyEnv::observe(UserId u) const {
  if (u != 0) throw UsageError("streak environment has a single user 0");
  Observation o;
  o.engaged = state_.engaged();
  return o;
}

RewardMap StreakToyEnv::step(const ActionMap& actions) {
  if (actions.size() != 1 || !actions.contains(0)) throw UsageError("streak step needs exactly one action for user 0");
  auto r = streak_step(state_, actions.at(0));
  state_ = r.state;
  return {{0, r.reward}};
}

Eigen::VectorXd StreakToyEnv::user_features(UserId u) const {
  if (u != 0) throw UsageError("streak environment has a single user 0");
  return Eigen::VectorXd(0);
}

Eigen::VectorXd StreakToyEnv::action_features(ActionId a) const {
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(2);
  if (a == kSkip || a == kRecommend) phi[a] = 1.0;
  return phi;
}

Eigen::VectorXd StreakToyEnv::interact_features(UserId u) const {
  if (u != 0) throw UsageError("streak environment has a single user 0");
  Eigen::VectorXd xi = Eigen::VectorXd::Zero(kStreakTrigger);
  for (int i = 0; i < state_.streak; ++i) xi[i] = 1.0;
  return xi;
}

}  // namespace deepex::envs
