#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "deepex/rng.hpp"

namespace deepex::casestudy {

// Tabular agents for the single- and multi-user SeqRec sample-complexity
// arguments. The environment is implicit: a life-cycle lasts T steps and pays
// reward 1 on its last step iff every action equals the satisfying one.

enum class Arm { kA1 = 0, kA2 = 1 };

inline Arm other(Arm a) { return a == Arm::kA1 ? Arm::kA2 : Arm::kA1; }

/// Belief over which single action raises satisfaction.
struct TwoHypothesisPosterior {
  double p_a1 = 0.5;
  double p_a2() const { return 1.0 - p_a1; }
  double p(Arm a) const { return a == Arm::kA1 ? p_a1 : p_a2(); }
  bool certain() const { return p_a1 == 0.0 || p_a1 == 1.0; }
};

enum class PosteriorUpdate {
  kRefuteOnFailure,  // a rewardless life-cycle under plan a zeroes hypothesis a
  kRewardOnly,       // only a rewarded life-cycle moves mass
};

struct DeLifecycle {
  Arm plan = Arm::kA1;
  bool rewarded = false;
  TwoHypothesisPosterior posterior;
};

/// Samples a hypothesis from the posterior, plays it for the whole life-cycle
/// and updates the posterior with the outcome.
DeLifecycle tabular_de_episode(const TwoHypothesisPosterior& posterior, Arm satisfying, Rng& rng,
                               PosteriorUpdate update = PosteriorUpdate::kRefuteOnFailure);

/// Uniform actions for T steps; success iff all T are a2 (the satisfying one).
bool tabular_random_episode(int horizon, Rng& rng);

/// Gaussian belief over an arm's immediate reward; unit observation noise.
struct GaussianArm {
  double mean = 0.0;
  double variance = 1.0;
  void observe(double reward);
};

struct TsLifecycle {
  std::vector<Arm> actions;
  bool rewarded = false;
};

/// Myopic Thompson sampling over immediate reward. Per step two standard
/// normal draws are taken in a fixed order; `swap_draws` feeds them to the
/// arms in reverse, which mirrors the trajectory under symmetric beliefs.
TsLifecycle tabular_ts_episode(std::array<GaussianArm, 2>& arms, int horizon, Rng& rng, bool swap_draws = false);

struct TabularArmStats {
  std::array<std::int64_t, 2> pulls{0, 0};
  std::array<double, 2> reward_sum{0.0, 0.0};
  std::int64_t t = 0;  // global step counter, persists across life-cycles
};

struct UcbLifecycle {
  std::vector<Arm> actions;
  bool rewarded = false;
};

/// mean + sqrt(log t / N(a)); unpulled arms are infinitely optimistic; ties go
/// to a1.
UcbLifecycle tabular_ucb_episode(TabularArmStats& stats, int horizon);

// ---------------------------------------------------------------- Monte Carlo

struct Estimate {
  double mean = 0.0;
  double std_err = 0.0;
  std::size_t trials = 0;
};

Estimate estimate_of(const std::vector<double>& samples);

/// Life-cycles until the first rewarded one (inclusive), per trial.
Estimate random_lifecycles_to_success(int horizon, std::size_t trials, Rng& rng);
Estimate ts_lifecycles_to_success(int horizon, std::size_t trials, Rng& rng);
Estimate de_lifecycles_to_success(std::size_t trials, Rng& rng, PosteriorUpdate update);

/// Fraction of successful random life-cycles.
Estimate random_success_rate(int horizon, std::size_t lifecycles, Rng& rng);

/// Fraction of a1 choices over pre-reward TS steps.
Estimate ts_choice_frequency(int horizon, std::size_t steps, Rng& rng);

struct UcbRun {
  double cumulative_reward = 0.0;
  std::size_t alternation_violations = 0;
  std::vector<Arm> first_actions;  // first few actions, for inspection
};

UcbRun ucb_run(int horizon, std::size_t lifecycles);

struct MultiUserRun {
  std::vector<double> round_rewards;  // summed over users, one entry per round
  double cumulative_reward = 0.0;
  std::size_t known_after_first_round = 0;
  bool complete_after_first_round = false;
};

/// Deep exploration per user with a generalizer that labels every user once
/// half of them have been identified.
MultiUserRun multiuser_de_sweep(std::size_t users, std::size_t rounds, int horizon, Rng& rng);

/// Uniform actions for every user in every round; never learns.
MultiUserRun multiuser_random_sweep(std::size_t users, std::size_t rounds, int horizon, Rng& rng);

}  // namespace deepex::casestudy
