#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "deepex/agents/agent.hpp"
#include "deepex/envs/config_io.hpp"

namespace deepex::harness {

struct AgentSpec {
  std::string label;  // column value in every artifact; defaults to the kind name
  agents::AgentConfig config;
};

/// Out-of-sample users for frozen evaluation.
struct EvalSpec {
  envs::EnvSpec environment;
  std::size_t life_cycles = 10;
};

struct ExperimentConfig {
  std::string name = "experiment";
  envs::EnvSpec environment;
  std::vector<AgentSpec> agents;
  std::vector<std::uint64_t> seeds;
  std::size_t life_cycles = 100;  // per user
  std::size_t max_steps = 0;      // safety cap per seed; 0 derives one from life_cycles
  bool save_checkpoints = true;
  std::optional<EvalSpec> eval;

  /// Throws ConfigError.
  void validate() const;
};

/// Layout:
///   [experiment] name, seeds = [..] | seed_count = n, life_cycles, max_steps,
///                save_checkpoints
///   [environment] ...                    (see envs::env_spec_from_toml)
///   [[agents]] kind, label, hidden, optimizer, lr, beta1, beta2, adam_epsilon,
///              sigma, target_sync, batch_size, warmup, train_every,
///              updates_per_train, buffer_capacity, epsilon_start, epsilon_end,
///              epsilon_decay_steps, ucb_scale, ts_scale, ridge, ensemble_size,
///              prior_scale, index_dim, train_indices, head_hidden
///   [eval] life_cycles, [eval.environment] ...
/// Unknown keys are rejected.
ExperimentConfig parse_experiment_config(std::string_view toml_text, std::string_view source = "<string>");
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

}  // namespace deepex::harness
