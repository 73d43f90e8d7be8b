#include "deepex/harness/experiment.hpp"

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <set>

#include "deepex/envs/seqrec.hpp"
#include "deepex/envs/streak_toy.hpp"
#include "deepex/errors.hpp"
#include "deepex/harness/csv.hpp"
#include "deepex/harness/plot.hpp"

namespace deepex::harness {
namespace {

using agents::Agent;
using agents::AgentKind;
using agents::Transition;
using envs::Environment;
using envs::UserId;

/// Environment steps one user needs for one life-cycle plus its reset.
std::size_t steps_per_lifecycle(const Environment& env) {
  if (dynamic_cast<const envs::StreakToyEnv*>(&env)) return envs::kStreakTrigger + envs::kDisengageSteps;
  return env.interact_size() + 1;
}

std::size_t model_input_size(const enn::ModelParams& model) {
  return std::visit([](const auto& m) { return m.input_size(); }, model);
}

struct UserTrack {
  std::optional<Transition> pending;
  std::size_t completed = 0;
  double reward = 0.0;
  std::size_t steps = 0;
  std::string digest;
  bool retired = false;
};

std::string run_label(const std::string& agent, std::uint64_t seed) {
  return agent + "-seed" + std::to_string(seed);
}

}  // namespace

void configure_allocator() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 256 << 20);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
}

std::size_t network_input_size(const Environment& env) {
  const auto users = env.active_users();
  if (users.empty()) throw ConfigError("environment has no active users");
  const auto table = agents::FeatureTable::from_environment(env);
  return static_cast<std::size_t>(env.user_features(users.front()).size()) + table.dim() + env.interact_size();
}

SeedRun rollout(Agent& agent, Environment& env, std::size_t life_cycles, const std::string& label, std::uint64_t seed,
                const RolloutOptions& options) {
  SeedRun run;
  run.agent = label;
  run.seed = seed;
  auto* seqrec = dynamic_cast<envs::SeqRecEnv*>(&env);

  std::map<UserId, UserTrack> users;
  for (auto u : env.active_users()) {
    users[u];
    run.users.push_back(u);
  }
  const std::size_t cap =
      options.max_steps ? options.max_steps : 2 * life_cycles * steps_per_lifecycle(env) + 100;

  try {
    for (std::size_t t = 0;; ++t) {
      if (t >= cap) {
        run.step_cap_reached = true;
        break;
      }
      envs::ActionMap actions;
      std::map<UserId, bool> was_boundary;
      for (auto u : env.active_users()) {
        auto& track = users[u];
        if (track.retired) continue;
        const auto allowed = env.constraint(env.observe(u));
        const bool boundary = allowed.size() == 1 && allowed.front() == env.rest_action();
        Eigen::VectorXd xi = env.interact_features(u);
        if (track.pending) {
          track.pending->next_interact = xi;
          track.pending->next_allowed = allowed;
          track.pending->terminal = boundary;
          agent.store(*track.pending);
          track.pending.reset();
        }
        if (track.completed >= life_cycles) {
          track.retired = true;
          if (seqrec) seqrec->set_active(u, false);
          continue;
        }

        agents::DecisionContext ctx{t, u, env.user_features(u), std::move(xi), allowed, boundary};
        auto decision = agent.select(ctx);
        if (!decision.index_digest.empty()) {
          if (boundary || track.digest.empty()) {
            track.digest = decision.index_digest;
          } else if (decision.index_digest != track.digest) {
            ++run.commitment_violations;
          }
        }
        if (!boundary) {
          Transition tr;
          tr.user_features = ctx.user_features;
          tr.action_features = env.action_features(decision.action);
          tr.interact = ctx.interact;
          tr.action = decision.action;
          track.pending = std::move(tr);
          ++track.steps;
        }
        if (options.log_decisions)
          run.decisions.push_back({t, u, boundary, decision.index_digest, decision.action, decision.scores});
        actions[u] = decision.action;
        was_boundary[u] = boundary;
      }
      if (actions.empty()) break;

      const auto rewards = env.step(actions);
      for (const auto& [u, a] : actions) {
        auto& track = users[u];
        const auto it = rewards.find(u);
        const double r = it == rewards.end() ? 0.0 : it->second;
        if (track.pending) track.pending->reward = track.pending->true_reward = r;
        track.reward += r;
        const auto obs = env.observe(u);
        if (options.log_transitions) {
          TransitionLog log{t, u, a, r, 0.0, 0, obs.leave};
          if (seqrec) {
            const auto& s = seqrec->state().users.at(u);
            log.satisfaction = s.satisfaction;
            log.length = s.lifecycle_length;
          }
          run.transitions.push_back(log);
        }
        if (!was_boundary[u] && env.at_boundary(u)) {
          run.records.push_back({"", label, seed, u, track.completed, track.reward, track.steps});
          ++track.completed;
          track.reward = 0.0;
          track.steps = 0;
        }
      }
      agent.end_step();
      run.steps = t + 1;
    }
  } catch (const NumericError& e) {
    run.ok = false;
    run.error = e.what();
  }
  return run;
}

SeedRun run_seed(const AgentSpec& spec, const envs::EnvSpec& environment, std::size_t life_cycles,
                 std::uint64_t seed, const RolloutOptions& options) {
  auto env = environment.make(seed);
  auto config = spec.config;
  if (config.epsilon_decay_steps == 0)
    config.epsilon_decay_steps = std::max<std::size_t>(1, life_cycles * steps_per_lifecycle(*env) / 2);
  auto agent = agents::make_agent(config, network_input_size(*env), agents::FeatureTable::from_environment(*env), seed);
  auto run = rollout(*agent, *env, life_cycles, spec.label, seed, options);
  if (config.kind != AgentKind::kRandom) run.model = agent->model();
  return run;
}

std::vector<RunRecord> ExperimentResult::records() const {
  std::vector<RunRecord> out;
  for (const auto& run : runs) {
    if (!run.ok) continue;
    for (auto r : run.records) {
      r.run_id = run_id;
      out.push_back(std::move(r));
    }
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config, std::ostream* log) {
  config.validate();
  ExperimentResult result;
  result.run_id = config.name;
  RolloutOptions options;
  options.max_steps = config.max_steps;
  for (const auto& agent : config.agents) {
    for (auto seed : config.seeds) {
      auto run = run_seed(agent, config.environment, config.life_cycles, seed, options);
      if (log) {
        *log << agent.label << " seed " << seed << ": " << run.steps << " steps";
        if (!run.records.empty()) {
          double sum = 0.0;
          for (const auto& r : run.records) sum += r.reward;
          *log << ", mean life-cycle reward " << sum / static_cast<double>(run.records.size());
        }
        *log << (run.ok ? "" : " (failed: " + run.error + ")") << '\n';
      }
      if (!run.ok)
        result.warnings.push_back(run_label(agent.label, seed) + " aborted and is excluded from aggregates: " +
                                  run.error);
      if (run.step_cap_reached)
        result.warnings.push_back(run_label(agent.label, seed) + " stopped at the step cap before every life-cycle ended");
      result.runs.push_back(std::move(run));
    }
  }
  result.metrics = compute_metrics(result.records());
  for (const auto& w : result.metrics.warnings) result.warnings.push_back(w);
  return result;
}

void write_artifacts(const ExperimentResult& result, const ExperimentConfig& config,
                     const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const auto open = [](const fs::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + p.string());
    return out;
  };

  const auto records = result.records();
  write_records(out_dir / "records.csv", records);

  {
    auto out = open(out_dir / "transitions.csv");
    out << "schema_version,run_id,agent,seed,t,user,action,reward,satisfaction,length,leave\n";
    for (const auto& run : result.runs)
      for (const auto& tr : run.transitions)
        out << kRecordSchemaVersion << ',' << result.run_id << ',' << run.agent << ',' << run.seed << ',' << tr.t
            << ',' << tr.user << ',' << tr.action << ',' << format_double(tr.reward) << ','
            << format_double(tr.satisfaction) << ',' << tr.length << ',' << (tr.leave ? 1 : 0) << '\n';
  }
  {
    auto out = open(out_dir / "decisions.csv");
    out << "schema_version,run_id,agent,seed,t,user,boundary,index,action,scores\n";
    for (const auto& run : result.runs)
      for (const auto& d : run.decisions) {
        out << kRecordSchemaVersion << ',' << result.run_id << ',' << run.agent << ',' << run.seed << ',' << d.t
            << ',' << d.user << ',' << (d.boundary ? 1 : 0) << ',' << d.index_digest << ',' << d.action << ',';
        for (Eigen::Index i = 0; i < d.scores.size(); ++i) out << (i ? ";" : "") << format_double(d.scores[i]);
        out << '\n';
      }
  }

  auto metrics = metrics_to_json(result.metrics);
  metrics["run_id"] = result.run_id;
  metrics["life_cycles"] = config.life_cycles;
  metrics["warnings"] = result.warnings;
  metrics["runs"] = nlohmann::json::array();
  for (const auto& run : result.runs) {
    nlohmann::json r{{"agent", run.agent},
                     {"seed", run.seed},
                     {"ok", run.ok},
                     {"steps", run.steps},
                     {"life_cycles_recorded", run.records.size()},
                     {"commitment_violations", run.commitment_violations}};
    if (!run.ok) r["error"] = run.error;
    if (run.model) r["checksum"] = enn::model_checksum(*run.model);
    metrics["runs"].push_back(std::move(r));
  }
  open(out_dir / "metrics.json") << metrics.dump(2) << '\n';
  open(out_dir / "summary.txt") << metrics_text_table(result.metrics);
  if (!records.empty()) open(out_dir / "learning_curve.svg") << render_learning_curve(result.metrics, result.run_id);

  if (config.save_checkpoints) {
    fs::create_directories(out_dir / "checkpoints");
    for (const auto& run : result.runs) {
      if (!run.model || !run.ok) continue;
      enn::Checkpoint ck{*run.model, {{"run_id", result.run_id},
                                      {"agent", run.agent},
                                      {"seed", run.seed},
                                      {"training_users", run.users}}};
      enn::save_checkpoint(ck, out_dir / "checkpoints" / (run_label(run.agent, run.seed) + ".ckpt"));
    }
  }
}

EvalResult evaluate_frozen(const enn::Checkpoint& checkpoint, const envs::EnvSpec& roster,
                           const std::vector<std::size_t>& training_users, std::size_t life_cycles,
                           const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw ValidationError("evaluation needs at least one seed");
  const std::set<std::size_t> trained(training_users.begin(), training_users.end());
  const auto check_overlap = [&](const std::vector<std::size_t>& ids) {
    for (auto u : ids)
      if (trained.count(u)) throw ValidationError("evaluation user " + std::to_string(u) + " was seen in training");
  };
  if (const auto fixed = roster.fixed_user_ids()) check_overlap(*fixed);

  const std::string label = checkpoint.metadata.is_object() ? checkpoint.metadata.value("agent", std::string("frozen"))
                                                             : std::string("frozen");
  EvalResult result;
  result.checksum_before = enn::model_checksum(checkpoint.model);
  result.checksum_after = result.checksum_before;
  std::vector<RunRecord> records;
  for (auto seed : seeds) {
    auto env = roster.make(seed);
    check_overlap(env->active_users());
    if (network_input_size(*env) != model_input_size(checkpoint.model))
      throw ValidationError("checkpoint input width does not match the evaluation environment");
    auto agent = agents::make_frozen_agent(checkpoint.model, agents::FeatureTable::from_environment(*env), seed);
    auto run = rollout(*agent, *env, life_cycles, label, seed);
    const auto after = enn::model_checksum(agent->model());
    if (after != result.checksum_before) result.checksum_after = after;
    if (run.ok)
      for (auto r : run.records) {
        r.run_id = "eval";
        records.push_back(std::move(r));
      }
    result.runs.push_back(std::move(run));
  }
  result.metrics = compute_metrics(records);
  return result;
}

MetricsTable evaluate_policy(Agent& policy, const envs::EnvSpec& roster, std::size_t life_cycles,
                             const std::vector<std::uint64_t>& seeds, const std::string& label) {
  std::vector<RunRecord> records;
  for (auto seed : seeds) {
    auto env = roster.make(seed);
    auto run = rollout(policy, *env, life_cycles, label, seed);
    for (auto r : run.records) {
      r.run_id = "eval";
      records.push_back(std::move(r));
    }
  }
  return compute_metrics(records);
}

}  // namespace deepex::harness
