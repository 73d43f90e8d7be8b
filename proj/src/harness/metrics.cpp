#include "deepex/harness/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <tuple>

namespace deepex::harness {

void RunningStats::add(double x) {
  ++count;
  const double delta = x - mean;
  mean += delta / static_cast<double>(count);
  m2 += delta * (x - mean);
}

void RunningStats::merge(const RunningStats& other) {
  if (other.count == 0) return;
  if (count == 0) {
    *this = other;
    return;
  }
  const double n_a = static_cast<double>(count);
  const double n_b = static_cast<double>(other.count);
  const double n = n_a + n_b;
  const double delta = other.mean - mean;
  mean += delta * n_b / n;
  m2 += other.m2 + delta * delta * n_a * n_b / n;
  count += other.count;
}

double RunningStats::std_dev() const {
  if (count < 2) return 0.0;
  return std::sqrt(m2 / static_cast<double>(count - 1));
}

double RunningStats::std_err() const {
  if (count < 2) return 0.0;
  return std_dev() / std::sqrt(static_cast<double>(count));
}

const AgentMetrics* MetricsTable::find(const std::string& agent) const {
  for (const auto& a : agents)
    if (a.agent == agent) return &a;
  return nullptr;
}

MetricsTable compute_metrics(const std::vector<RunRecord>& records) {
  using RunKey = std::tuple<std::string, std::uint64_t>;  // run_id, seed
  struct RunAccum {
    double sum = 0.0;
    std::size_t n = 0;
    std::map<std::size_t, std::pair<double, std::size_t>> per_cycle;  // life-cycle -> (sum, users)
  };
  struct AgentAccum {
    std::vector<RunKey> order;
    std::map<RunKey, RunAccum> runs;
  };

  std::vector<std::string> agent_order;
  std::map<std::string, AgentAccum> by_agent;
  for (const auto& r : records) {
    auto [it, fresh] = by_agent.try_emplace(r.agent);
    if (fresh) agent_order.push_back(r.agent);
    const RunKey key{r.run_id, r.seed};
    auto [run, new_run] = it->second.runs.try_emplace(key);
    if (new_run) it->second.order.push_back(key);
    run->second.sum += r.reward;
    ++run->second.n;
    auto& cell = run->second.per_cycle[r.life_cycle];
    cell.first += r.reward;
    ++cell.second;
  }

  MetricsTable table;
  for (const auto& name : agent_order) {
    const auto& acc = by_agent.at(name);
    AgentMetrics m;
    m.agent = name;
    std::map<std::size_t, RunningStats> curve;
    for (const auto& key : acc.order) {
      const auto& run = acc.runs.at(key);
      const double mean = run.sum / static_cast<double>(run.n);
      m.seed_means.push_back(mean);
      m.across_seeds.add(mean);
      for (const auto& [k, cell] : run.per_cycle) curve[k].add(cell.first / static_cast<double>(cell.second));
    }
    for (const auto& [k, s] : curve) {
      m.curve_mean.push_back(s.mean);
      m.curve_std_err.push_back(s.std_err());
    }
    if (m.across_seeds.count < 2)
      table.warnings.push_back("agent '" + name + "' has a single seed; standard error reported as 0");
    table.agents.push_back(std::move(m));
  }
  return table;
}

nlohmann::json metrics_to_json(const MetricsTable& table) {
  nlohmann::json out;
  out["agents"] = nlohmann::json::array();
  for (const auto& a : table.agents) {
    out["agents"].push_back({{"agent", a.agent},
                             {"seeds", a.across_seeds.count},
                             {"mean", a.mean()},
                             {"std_err", a.std_err()},
                             {"std_dev", a.std_dev()},
                             {"seed_means", a.seed_means},
                             {"curve_mean", a.curve_mean},
                             {"curve_std_err", a.curve_std_err}});
  }
  out["warnings"] = table.warnings;
  return out;
}

std::string metrics_text_table(const MetricsTable& table) {
  std::size_t width = 5;
  for (const auto& a : table.agents) width = std::max(width, a.agent.size());
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-*s  %5s  %8s  %8s  %8s\n", static_cast<int>(width), "agent", "seeds", "mean",
                "stderr", "std");
  out << line;
  for (const auto& a : table.agents) {
    std::snprintf(line, sizeof line, "%-*s  %5zu  %8.4f  %8.4f  %8.4f\n", static_cast<int>(width), a.agent.c_str(),
                  a.across_seeds.count, a.mean(), a.std_err(), a.std_dev());
    out << line;
  }
  return out.str();
}

}  // namespace deepex::harness
