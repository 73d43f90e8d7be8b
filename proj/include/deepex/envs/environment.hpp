#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace deepex::envs {

using UserId = std::size_t;
using ActionId = int;

/// What the agent sees of one active user at one time step.
struct Observation {
  bool satisfied = false;  // SeqRec
  bool leave = false;      // SeqRec
  bool engaged = true;     // StreakToy
};

using ActionMap = std::map<UserId, ActionId>;
using RewardMap = std::map<UserId, double>;

/// Sequential recommendation environment over a community of users: observation
/// set, action set, reward r(o), constraint c(o) and the transition mechanism.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string name() const = 0;
  virtual std::size_t num_actions() const = 0;
  virtual std::string action_name(ActionId a) const = 0;

  /// Active users U_t in ascending id order.
  virtual std::vector<UserId> active_users() const = 0;
  virtual Observation observe(UserId u) const = 0;
  virtual double reward(const Observation& o) const = 0;

  /// Allowed action set c(o), in ascending action id.
  virtual std::vector<ActionId> constraint(const Observation& o) const = 0;

  /// The action forced at a life-cycle boundary (no-op / skip).
  virtual ActionId rest_action() const = 0;

  /// Applies one action per active user. Returns R_{t+1,u} for every user
  /// active after the step.
  virtual RewardMap step(const ActionMap& actions) = 0;

  virtual Eigen::VectorXd user_features(UserId u) const = 0;
  virtual Eigen::VectorXd action_features(ActionId a) const = 0;
  virtual Eigen::VectorXd interact_features(UserId u) const = 0;
  virtual std::size_t interact_size() const = 0;

  /// Constraint of an active user; throws UsageError for inactive users.
  std::vector<ActionId> allowed(UserId u) const { return constraint(observe(u)); }

  /// True when the user is between life-cycles, i.e. only the rest action is
  /// allowed.
  bool at_boundary(UserId u) const {
    const auto a = allowed(u);
    return a.size() == 1 && a.front() == rest_action();
  }
};

}  // namespace deepex::envs
