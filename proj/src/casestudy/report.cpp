#include "deepex/casestudy/report.hpp"

#include <cmath>
#include <functional>
#include <map>

#include "deepex/casestudy/tabular.hpp"
#include "deepex/errors.hpp"
#include "deepex/rng.hpp"

namespace deepex::casestudy {
namespace {

constexpr double kZ95 = 1.959963984540054;

ClaimResult from_estimate(const Estimate& e) {
  ClaimResult r;
  r.estimate = e.mean;
  r.std_err = e.std_err;
  r.ci_low = e.mean - kZ95 * e.std_err;
  r.ci_high = e.mean + kZ95 * e.std_err;
  r.trials = e.trials;
  return r;
}

bool within_3sigma(const Estimate& e, double target) {
  return std::abs(e.mean - target) <= 3.0 * e.std_err;
}

bool within_relative(double value, double target, double tol) {
  return std::abs(value - target) <= tol * std::abs(target);
}

ClaimResult de_identify(Rng& rng) {
  const auto e = de_lifecycles_to_success(10000, rng, PosteriorUpdate::kRewardOnly);
  auto r = from_estimate(e);
  r.description = "deep exploration, geometric count: life-cycles until the satisfying plan is sampled";
  r.criterion = "mean in [1.9, 2.1]";
  r.pass = e.mean >= 1.9 && e.mean <= 2.1;
  return r;
}

ClaimResult de_refute(Rng& rng) {
  const auto e = de_lifecycles_to_success(10000, rng, PosteriorUpdate::kRefuteOnFailure);
  auto r = from_estimate(e);
  r.description = "deep exploration with refutation: life-cycles until first reward";
  r.criterion = "mean within 3 standard errors of 1.5";
  r.pass = within_3sigma(e, 1.5);
  return r;
}

ClaimResult random_rate(Rng& rng) {
  const auto e = random_success_rate(4, 100000, rng);
  auto r = from_estimate(e);
  r.description = "uniform random, T=4: per-life-cycle success rate";
  r.criterion = "within 3 standard errors of 0.0625";
  r.pass = within_3sigma(e, 0.0625);
  return r;
}

ClaimResult random_t4(Rng& rng) {
  const auto e = random_lifecycles_to_success(4, 10000, rng);
  auto r = from_estimate(e);
  r.description = "uniform random, T=4: life-cycles to first success";
  r.criterion = "within 10% of 16";
  r.pass = within_relative(e.mean, 16.0, 0.10);
  return r;
}

ClaimResult ts_choice(Rng& rng) {
  const auto e = ts_choice_frequency(10, 100000, rng);
  auto r = from_estimate(e);
  r.description = "myopic Thompson sampling, T=10: pre-reward frequency of a1";
  r.criterion = "within 3 standard errors of 0.5";
  r.pass = within_3sigma(e, 0.5);
  return r;
}

ClaimResult ts_t4(Rng& rng) {
  const auto e = ts_lifecycles_to_success(4, 10000, rng);
  auto r = from_estimate(e);
  r.description = "myopic Thompson sampling, T=4: life-cycles to first success";
  r.criterion = "within 10% of 16";
  r.pass = within_relative(e.mean, 16.0, 0.10);
  return r;
}

ClaimResult ucb_claim(int horizon) {
  const auto run = ucb_run(horizon, 1000);
  ClaimResult r;
  r.estimate = run.cumulative_reward;
  r.ci_low = r.ci_high = run.cumulative_reward;
  r.trials = 1000;
  r.description = "UCB, T=" + std::to_string(horizon) + ": cumulative reward over 1000 life-cycles";
  r.criterion = "exactly 0 with no consecutive repeat before the first reward";
  r.pass = run.cumulative_reward == 0.0 && run.alternation_violations == 0;
  r.details["alternation_violations"] = run.alternation_violations;
  r.details["steps"] = 1000 * horizon;
  return r;
}

ClaimResult multiuser(Rng& rng, bool deep) {
  constexpr std::size_t kUsers = 20, kRounds = 10, kTrials = 1000;
  constexpr int kHorizon = 10;
  std::vector<double> totals;
  std::size_t complete = 0;
  for (std::size_t k = 0; k < kTrials; ++k) {
    const auto run = deep ? multiuser_de_sweep(kUsers, kRounds, kHorizon, rng)
                          : multiuser_random_sweep(kUsers, kRounds, kHorizon, rng);
    totals.push_back(run.cumulative_reward);
    if (run.complete_after_first_round) ++complete;
  }
  auto r = from_estimate(estimate_of(totals));
  const double completion = static_cast<double>(complete) / static_cast<double>(kTrials);
  r.details["complete_after_first_round"] = completion;
  r.details["users"] = kUsers;
  r.details["rounds"] = kRounds;
  r.details["horizon"] = kHorizon;
  if (deep) {
    const double floor = 0.9 * kUsers * (kRounds - 1);
    r.description = "deep exploration with generalizer, N=20, M=10, T=10: cumulative reward";
    r.criterion = "mean >= 162 and identification complete after round 1 in >= 95% of trials";
    r.pass = r.estimate >= floor && completion >= 0.95;
  } else {
    r.description = "uniform random with generalizer, N=20, M=10, T=10: cumulative reward";
    r.criterion = "mean <= 1.0";
    r.pass = r.estimate <= 1.0;
  }
  return r;
}

using ClaimFn = std::function<ClaimResult(Rng&)>;

const std::vector<std::pair<std::string, ClaimFn>>& registry() {
  static const std::vector<std::pair<std::string, ClaimFn>> claims = {
      {"de-identify", de_identify},
      {"de-refute", de_refute},
      {"random-rate-t4", random_rate},
      {"random-t4", random_t4},
      {"ts-choice", ts_choice},
      {"ts-t4", ts_t4},
      {"ucb-t4", [](Rng&) { return ucb_claim(4); }},
      {"ucb-t10", [](Rng&) { return ucb_claim(10); }},
      {"multiuser-de", [](Rng& rng) { return multiuser(rng, true); }},
      {"multiuser-random", [](Rng& rng) { return multiuser(rng, false); }},
  };
  return claims;
}

}  // namespace

const std::vector<std::string>& claim_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> out;
    for (const auto& [id, fn] : registry()) out.push_back(id);
    return out;
  }();
  return ids;
}

ClaimResult run_claim(const std::string& id, std::uint64_t seed) {
  for (const auto& [name, fn] : registry()) {
    if (name != id) continue;
    auto rng = make_rng(seed, "casestudy/" + id);
    auto r = fn(rng);
    r.id = id;
    return r;
  }
  throw UsageError("unknown case-study claim '" + id + "'");
}

nlohmann::json to_json(const ClaimResult& c) {
  return {{"id", c.id},         {"description", c.description}, {"criterion", c.criterion},
          {"estimate", c.estimate}, {"std_err", c.std_err},     {"ci95", {c.ci_low, c.ci_high}},
          {"trials", c.trials}, {"pass", c.pass},               {"details", c.details}};
}

nlohmann::json make_report(const std::vector<ClaimResult>& claims, std::uint64_t seed) {
  nlohmann::json out;
  out["seed"] = seed;
  out["claims"] = nlohmann::json::array();
  bool all = true;
  for (const auto& c : claims) {
    out["claims"].push_back(to_json(c));
    all = all && c.pass;
  }
  out["pass"] = all;
  return out;
}

}  // namespace deepex::casestudy
