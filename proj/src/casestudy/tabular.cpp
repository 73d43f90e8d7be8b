#include "deepex/casestudy/tabular.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace deepex::casestudy {
namespace {

constexpr Arm kSatisfying = Arm::kA2;

void check_horizon(int horizon) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
}

std::vector<Arm> half_and_half(std::size_t users, Rng& rng) {
  std::vector<Arm> prefs(users, Arm::kA2);
  std::fill(prefs.begin(), prefs.begin() + static_cast<std::ptrdiff_t>(users / 2), Arm::kA1);
  std::shuffle(prefs.begin(), prefs.end(), rng);
  return prefs;
}

}  // namespace

DeLifecycle tabular_de_episode(const TwoHypothesisPosterior& posterior, Arm satisfying, Rng& rng,
                               PosteriorUpdate update) {
  DeLifecycle out;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  out.plan = unit(rng) < posterior.p_a1 ? Arm::kA1 : Arm::kA2;
  out.rewarded = out.plan == satisfying;
  out.posterior = posterior;
  if (out.rewarded) {
    out.posterior.p_a1 = out.plan == Arm::kA1 ? 1.0 : 0.0;
  } else if (update == PosteriorUpdate::kRefuteOnFailure) {
    out.posterior.p_a1 = out.plan == Arm::kA1 ? 0.0 : 1.0;
  }
  return out;
}

bool tabular_random_episode(int horizon, Rng& rng) {
  check_horizon(horizon);
  std::bernoulli_distribution coin(0.5);
  bool all_satisfying = true;
  for (int i = 0; i < horizon; ++i)
    if (coin(rng)) all_satisfying = false;  // drew a1
  return all_satisfying;
}

void GaussianArm::observe(double reward) {
  const double precision = 1.0 / variance + 1.0;
  mean = (mean / variance + reward) / precision;
  variance = 1.0 / precision;
}

TsLifecycle tabular_ts_episode(std::array<GaussianArm, 2>& arms, int horizon, Rng& rng, bool swap_draws) {
  check_horizon(horizon);
  std::normal_distribution<double> normal(0.0, 1.0);
  TsLifecycle out;
  for (int i = 0; i < horizon; ++i) {
    double e1 = normal(rng);
    double e2 = normal(rng);
    if (swap_draws) std::swap(e1, e2);
    const double s1 = arms[0].mean + std::sqrt(arms[0].variance) * e1;
    const double s2 = arms[1].mean + std::sqrt(arms[1].variance) * e2;
    out.actions.push_back(s2 > s1 ? Arm::kA2 : Arm::kA1);
  }
  // Reward arrives only at the end and only for the all-a2 sequence; every
  // earlier step is observed as 0.
  out.rewarded = std::all_of(out.actions.begin(), out.actions.end(), [](Arm a) { return a == kSatisfying; });
  for (int i = 0; i < horizon; ++i) {
    const bool last = i + 1 == horizon;
    arms[static_cast<std::size_t>(out.actions[static_cast<std::size_t>(i)])].observe(last && out.rewarded ? 1.0 : 0.0);
  }
  return out;
}

UcbLifecycle tabular_ucb_episode(TabularArmStats& stats, int horizon) {
  check_horizon(horizon);
  UcbLifecycle out;
  int satisfaction = 0;
  for (int i = 0; i < horizon; ++i) {
    ++stats.t;
    std::array<double, 2> score{};
    for (std::size_t a = 0; a < 2; ++a) {
      if (stats.pulls[a] == 0) {
        score[a] = std::numeric_limits<double>::infinity();
      } else {
        const double n = static_cast<double>(stats.pulls[a]);
        score[a] = stats.reward_sum[a] / n + std::sqrt(std::log(static_cast<double>(stats.t)) / n);
      }
    }
    const Arm pick = score[1] > score[0] ? Arm::kA2 : Arm::kA1;
    out.actions.push_back(pick);
    if (pick == kSatisfying) ++satisfaction;
    const bool reward = i + 1 == horizon && satisfaction == horizon;
    out.rewarded = out.rewarded || reward;
    ++stats.pulls[static_cast<std::size_t>(pick)];
    stats.reward_sum[static_cast<std::size_t>(pick)] += reward ? 1.0 : 0.0;
  }
  return out;
}

Estimate estimate_of(const std::vector<double>& samples) {
  Estimate e;
  e.trials = samples.size();
  if (samples.empty()) return e;
  double sum = 0.0;
  for (double s : samples) sum += s;
  e.mean = sum / static_cast<double>(samples.size());
  if (samples.size() > 1) {
    double ss = 0.0;
    for (double s : samples) ss += (s - e.mean) * (s - e.mean);
    e.std_err = std::sqrt(ss / static_cast<double>(samples.size() - 1) / static_cast<double>(samples.size()));
  }
  return e;
}

Estimate random_lifecycles_to_success(int horizon, std::size_t trials, Rng& rng) {
  std::vector<double> counts;
  counts.reserve(trials);
  for (std::size_t k = 0; k < trials; ++k) {
    double n = 1;
    while (!tabular_random_episode(horizon, rng)) ++n;
    counts.push_back(n);
  }
  return estimate_of(counts);
}

Estimate ts_lifecycles_to_success(int horizon, std::size_t trials, Rng& rng) {
  std::vector<double> counts;
  counts.reserve(trials);
  for (std::size_t k = 0; k < trials; ++k) {
    std::array<GaussianArm, 2> arms{};
    double n = 1;
    while (!tabular_ts_episode(arms, horizon, rng).rewarded) ++n;
    counts.push_back(n);
  }
  return estimate_of(counts);
}

Estimate de_lifecycles_to_success(std::size_t trials, Rng& rng, PosteriorUpdate update) {
  std::vector<double> counts;
  counts.reserve(trials);
  for (std::size_t k = 0; k < trials; ++k) {
    TwoHypothesisPosterior posterior;
    double n = 1;
    for (;;) {
      const auto lc = tabular_de_episode(posterior, kSatisfying, rng, update);
      posterior = lc.posterior;
      if (lc.rewarded) break;
      ++n;
    }
    counts.push_back(n);
  }
  return estimate_of(counts);
}

Estimate random_success_rate(int horizon, std::size_t lifecycles, Rng& rng) {
  std::vector<double> hits;
  hits.reserve(lifecycles);
  for (std::size_t k = 0; k < lifecycles; ++k) hits.push_back(tabular_random_episode(horizon, rng) ? 1.0 : 0.0);
  return estimate_of(hits);
}

Estimate ts_choice_frequency(int horizon, std::size_t steps, Rng& rng) {
  std::vector<double> picks;
  picks.reserve(steps);
  std::array<GaussianArm, 2> arms{};
  while (picks.size() < steps) {
    const auto lc = tabular_ts_episode(arms, horizon, rng);
    if (lc.rewarded) {
      // Only the pre-reward regime is of interest; restart from the prior.
      arms = {};
      continue;
    }
    for (Arm a : lc.actions) {
      if (picks.size() == steps) break;
      picks.push_back(a == Arm::kA1 ? 1.0 : 0.0);
    }
  }
  return estimate_of(picks);
}

UcbRun ucb_run(int horizon, std::size_t lifecycles) {
  UcbRun run;
  TabularArmStats stats;
  bool have_prev = false;
  Arm prev = Arm::kA1;
  for (std::size_t k = 0; k < lifecycles; ++k) {
    const auto lc = tabular_ucb_episode(stats, horizon);
    if (lc.rewarded) run.cumulative_reward += 1.0;
    for (Arm a : lc.actions) {
      if (run.first_actions.size() < 8) run.first_actions.push_back(a);
      const bool both_initialized = stats.pulls[0] > 0 && stats.pulls[1] > 0;
      if (have_prev && both_initialized && a == prev && run.cumulative_reward == 0.0) ++run.alternation_violations;
      prev = a;
      have_prev = true;
    }
  }
  return run;
}

namespace {

template <class PlayUnknown>
MultiUserRun multiuser_sweep(std::size_t users, std::size_t rounds, Rng& rng, PlayUnknown play_unknown) {
  if (users == 0) throw std::invalid_argument("multi-user sweep needs at least one user");
  const auto prefs = half_and_half(users, rng);
  std::vector<TwoHypothesisPosterior> posteriors(users);
  std::vector<bool> known(users, false);
  bool generalized = false;

  MultiUserRun run;
  for (std::size_t r = 0; r < rounds; ++r) {
    double reward = 0.0;
    for (std::size_t u = 0; u < users; ++u) {
      if (known[u] || generalized) {
        reward += 1.0;
        known[u] = true;
        continue;
      }
      if (play_unknown(posteriors[u], prefs[u])) reward += 1.0;
      known[u] = posteriors[u].certain();
    }
    run.round_rewards.push_back(reward);
    run.cumulative_reward += reward;
    const auto n_known = static_cast<std::size_t>(std::count(known.begin(), known.end(), true));
    if (2 * n_known >= users) generalized = true;
    if (r == 0) {
      run.known_after_first_round = n_known;
      run.complete_after_first_round = generalized;
    }
  }
  return run;
}

}  // namespace

MultiUserRun multiuser_de_sweep(std::size_t users, std::size_t rounds, int horizon, Rng& rng) {
  check_horizon(horizon);
  return multiuser_sweep(users, rounds, rng, [&](TwoHypothesisPosterior& p, Arm pref) {
    const auto lc = tabular_de_episode(p, pref, rng);
    p = lc.posterior;
    return lc.rewarded;
  });
}

MultiUserRun multiuser_random_sweep(std::size_t users, std::size_t rounds, int horizon, Rng& rng) {
  check_horizon(horizon);
  if (users == 0) throw std::invalid_argument("multi-user sweep needs at least one user");
  const auto prefs = half_and_half(users, rng);
  std::bernoulli_distribution coin(0.5);
  MultiUserRun run;
  for (std::size_t r = 0; r < rounds; ++r) {
    double reward = 0.0;
    for (std::size_t u = 0; u < users; ++u) {
      bool hit = true;
      for (int i = 0; i < horizon; ++i)
        if ((coin(rng) ? Arm::kA1 : Arm::kA2) != prefs[u]) hit = false;
      if (hit) reward += 1.0;
    }
    run.round_rewards.push_back(reward);
    run.cumulative_reward += reward;
  }
  return run;
}

}  // namespace deepex::casestudy
