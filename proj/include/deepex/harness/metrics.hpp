#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace deepex::harness {

/// Count, mean and sum of squared deviations; merges exactly (up to
/// rounding) so partial aggregates combine into the aggregate of the union.
struct RunningStats {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x);
  void merge(const RunningStats& other);
  /// Sample standard deviation; 0 below two samples.
  double std_dev() const;
  double std_err() const;
};

/// One life-cycle of one user.
struct RunRecord {
  std::string run_id;
  std::string agent;
  std::uint64_t seed = 0;
  std::size_t user = 0;
  std::size_t life_cycle = 0;  // 0-based, per user
  double reward = 0.0;         // cumulative within the life-cycle
  std::size_t steps = 0;       // non-rest actions taken
};

struct AgentMetrics {
  std::string agent;
  RunningStats across_seeds;        // over per-seed means
  std::vector<double> seed_means;   // in first-seen order
  std::vector<double> curve_mean;   // per life-cycle index
  std::vector<double> curve_std_err;

  double mean() const { return across_seeds.mean; }
  double std_err() const { return across_seeds.std_err(); }
  double std_dev() const { return across_seeds.std_dev(); }
};

struct MetricsTable {
  std::vector<AgentMetrics> agents;  // in first-seen order
  std::vector<std::string> warnings;

  const AgentMetrics* find(const std::string& agent) const;
};

/// Per run (run_id, agent, seed): mean life-cycle reward over every user and
/// life-cycle. Per agent: mean, standard error and standard deviation across
/// runs, plus the per-life-cycle learning curve.
MetricsTable compute_metrics(const std::vector<RunRecord>& records);

nlohmann::json metrics_to_json(const MetricsTable& table);
std::string metrics_text_table(const MetricsTable& table);

}  // namespace deepex::harness
