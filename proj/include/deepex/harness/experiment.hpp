#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "deepex/agents/agent.hpp"
#include "deepex/enn/checkpoint.hpp"
#include "deepex/harness/config.hpp"
#include "deepex/harness/metrics.hpp"

namespace deepex::harness {

struct DecisionLog {
  std::size_t t = 0;
  std::size_t user = 0;
  bool boundary = false;
  std::string index_digest;
  int action = 0;
  Eigen::VectorXd scores;
};

struct TransitionLog {
  std::size_t t = 0;
  std::size_t user = 0;
  int action = 0;
  double reward = 0.0;  // R_{t+1}
  double satisfaction = 0.0;
  int length = 0;
  bool leave = false;
};

struct RolloutOptions {
  bool log_decisions = true;
  bool log_transitions = true;
  std::size_t max_steps = 0;  // 0 derives a cap from life_cycles
};

/// Everything produced by one agent on one seed.
struct SeedRun {
  std::string agent;
  std::uint64_t seed = 0;
  bool ok = true;
  std::string error;
  std::size_t steps = 0;
  bool step_cap_reached = false;
  std::vector<std::size_t> users;  // roster the agent was trained or evaluated on
  std::vector<RunRecord> records;
  std::vector<DecisionLog> decisions;
  std::vector<TransitionLog> transitions;
  std::size_t commitment_violations = 0;  // decisions whose index changed mid life-cycle
  std::optional<enn::ModelParams> model;
};

/// Drives one agent through `life_cycles` life-cycles per user: observe,
/// store the previous transition, select, step, train. Users are retired once
/// their quota is met. NumericError from training marks the run as failed.
SeedRun rollout(agents::Agent& agent, envs::Environment& env, std::size_t life_cycles, const std::string& label,
                std::uint64_t seed, const RolloutOptions& options = {});

/// Builds environment and agent for one seed and rolls out.
SeedRun run_seed(const AgentSpec& spec, const envs::EnvSpec& environment, std::size_t life_cycles,
                 std::uint64_t seed, const RolloutOptions& options = {});

/// Keeps freed training temporaries in the heap instead of returning them to
/// the OS after every update (glibc only; a no-op elsewhere). Call once at
/// program start.
void configure_allocator();

/// Width of the value-network input for an environment.
std::size_t network_input_size(const envs::Environment& env);

struct ExperimentResult {
  std::string run_id;
  std::vector<SeedRun> runs;
  MetricsTable metrics;  // failed seeds excluded
  std::vector<std::string> warnings;

  std::vector<RunRecord> records() const;
};

ExperimentResult run_experiment(const ExperimentConfig& config, std::ostream* log = nullptr);

/// records.csv, transitions.csv, decisions.csv, metrics.json, summary.txt,
/// learning_curve.svg and checkpoints/ under `out_dir`.
void write_artifacts(const ExperimentResult& result, const ExperimentConfig& config,
                     const std::filesystem::path& out_dir);

struct EvalResult {
  MetricsTable metrics;
  std::uint64_t checksum_before = 0;
  std::uint64_t checksum_after = 0;
  std::vector<SeedRun> runs;
};

/// Greedy rollouts of checkpointed parameters on out-of-sample users, with no
/// parameter updates. Throws ValidationError when the roster shares a user
/// with `training_users` or the network does not fit the environment.
EvalResult evaluate_frozen(const enn::Checkpoint& checkpoint, const envs::EnvSpec& roster,
                           const std::vector<std::size_t>& training_users, std::size_t life_cycles,
                           const std::vector<std::uint64_t>& seeds);

/// Rolls out an arbitrary fixed policy (frozen agent or oracle) over seeds.
MetricsTable evaluate_policy(agents::Agent& policy, const envs::EnvSpec& roster, std::size_t life_cycles,
                             const std::vector<std::uint64_t>& seeds, const std::string& label = "policy");

}  // namespace deepex::harness
