#include "deepex/harness/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "deepex/errors.hpp"

namespace deepex::harness {
namespace {

using agents::AgentConfig;

void reject_unknown(const toml::table& t, const std::set<std::string_view>& known, const std::string& where) {
  for (const auto& [key, node] : t)
    if (!known.count(key.str())) throw ConfigError("unknown key '" + std::string(key.str()) + "' in " + where);
}

std::int64_t get_int(const toml::table& t, std::string_view key, std::int64_t fallback, const std::string& where) {
  const auto* node = t.get(key);
  if (!node) return fallback;
  auto v = node->value_exact<std::int64_t>();
  if (!v) throw ConfigError(where + "." + std::string(key) + " must be an integer");
  return *v;
}

std::size_t get_count(const toml::table& t, std::string_view key, std::size_t fallback, const std::string& where) {
  const auto v = get_int(t, key, static_cast<std::int64_t>(fallback), where);
  if (v < 0) throw ConfigError(where + "." + std::string(key) + " must be >= 0");
  return static_cast<std::size_t>(v);
}

double get_double(const toml::table& t, std::string_view key, double fallback, const std::string& where) {
  const auto* node = t.get(key);
  if (!node) return fallback;
  auto v = node->value<double>();  // accepts integers too
  if (!v) throw ConfigError(where + "." + std::string(key) + " must be a number");
  return *v;
}

std::string get_string(const toml::table& t, std::string_view key, std::string fallback, const std::string& where) {
  const auto* node = t.get(key);
  if (!node) return fallback;
  auto v = node->value_exact<std::string>();
  if (!v) throw ConfigError(where + "." + std::string(key) + " must be a string");
  return *v;
}

bool get_bool(const toml::table& t, std::string_view key, bool fallback, const std::string& where) {
  const auto* node = t.get(key);
  if (!node) return fallback;
  auto v = node->value_exact<bool>();
  if (!v) throw ConfigError(where + "." + std::string(key) + " must be a boolean");
  return *v;
}

std::vector<std::size_t> get_sizes(const toml::table& t, std::string_view key, std::vector<std::size_t> fallback,
                                   const std::string& where) {
  const auto* node = t.get(key);
  if (!node) return fallback;
  const auto* arr = node->as_array();
  if (!arr) throw ConfigError(where + "." + std::string(key) + " must be an array of integers");
  std::vector<std::size_t> out;
  for (const auto& item : *arr) {
    auto v = item.value_exact<std::int64_t>();
    if (!v || *v < 0) throw ConfigError(where + "." + std::string(key) + " must hold non-negative integers");
    out.push_back(static_cast<std::size_t>(*v));
  }
  return out;
}

const std::set<std::string_view> kAgentKeys = {
    "kind",        "label",       "hidden",          "optimizer",     "lr",           "beta1",
    "beta2",       "adam_epsilon", "sigma",          "target_sync",   "batch_size",   "warmup",
    "train_every", "updates_per_train", "buffer_capacity", "epsilon_start", "epsilon_end",
    "epsilon_decay_steps", "ucb_scale", "ts_scale",  "ridge",         "ensemble_size", "prior_scale",
    "index_dim",   "train_indices", "head_hidden"};

AgentSpec parse_agent(const toml::table& t, std::size_t position) {
  const std::string where = "agents[" + std::to_string(position) + "]";
  reject_unknown(t, kAgentKeys, where);
  AgentSpec spec;
  AgentConfig& c = spec.config;
  const auto kind = get_string(t, "kind", "", where);
  if (kind.empty()) throw ConfigError(where + " needs a kind");
  c.kind = agents::agent_kind_from_string(kind);
  spec.label = get_string(t, "label", kind, where);

  c.hidden = get_sizes(t, "hidden", c.hidden, where);
  const auto opt = get_string(t, "optimizer", "adam", where);
  if (opt == "adam") {
    c.optimizer.kind = nn::OptimizerKind::kAdam;
  } else if (opt == "sgd") {
    c.optimizer.kind = nn::OptimizerKind::kSgd;
  } else {
    throw ConfigError(where + ".optimizer must be \"adam\" or \"sgd\"");
  }
  c.optimizer.learning_rate = get_double(t, "lr", c.optimizer.learning_rate, where);
  c.optimizer.beta1 = get_double(t, "beta1", c.optimizer.beta1, where);
  c.optimizer.beta2 = get_double(t, "beta2", c.optimizer.beta2, where);
  c.optimizer.epsilon = get_double(t, "adam_epsilon", c.optimizer.epsilon, where);

  c.sigma = get_double(t, "sigma", c.sigma, where);
  c.target_sync = get_count(t, "target_sync", c.target_sync, where);
  c.batch_size = get_count(t, "batch_size", c.batch_size, where);
  c.warmup = get_count(t, "warmup", c.warmup, where);
  c.train_every = get_count(t, "train_every", c.train_every, where);
  c.updates_per_train = get_count(t, "updates_per_train", c.updates_per_train, where);
  c.buffer_capacity = get_count(t, "buffer_capacity", c.buffer_capacity, where);
  c.epsilon_start = get_double(t, "epsilon_start", c.epsilon_start, where);
  c.epsilon_end = get_double(t, "epsilon_end", c.epsilon_end, where);
  c.epsilon_decay_steps = get_count(t, "epsilon_decay_steps", c.epsilon_decay_steps, where);
  c.ucb_scale = get_double(t, "ucb_scale", c.ucb_scale, where);
  c.ts_scale = get_double(t, "ts_scale", c.ts_scale, where);
  c.ridge = get_double(t, "ridge", c.ridge, where);
  c.ensemble_size = get_count(t, "ensemble_size", c.ensemble_size, where);
  c.prior_scale = get_double(t, "prior_scale", c.prior_scale, where);
  c.index_dim = get_count(t, "index_dim", c.index_dim, where);
  c.train_indices = get_count(t, "train_indices", c.train_indices, where);
  c.head_hidden = get_sizes(t, "head_hidden", c.head_hidden, where);
  return spec;
}

bool plain_label(const std::string& s) {
  if (s.empty()) return false;
  for (char ch : s)
    if (ch == ',' || ch == '"' || ch == '\n' || ch == '\r') return false;
  return true;
}

ExperimentConfig from_table(const toml::table& root) {
  reject_unknown(root, {"experiment", "environment", "agents", "eval"}, "the top level");
  ExperimentConfig cfg;

  const auto* exp = root.get_as<toml::table>("experiment");
  if (!exp) throw ConfigError("missing [experiment] table");
  reject_unknown(*exp, {"name", "seeds", "seed_count", "life_cycles", "max_steps", "save_checkpoints"}, "[experiment]");
  cfg.name = get_string(*exp, "name", cfg.name, "experiment");
  if (exp->contains("seeds") && exp->contains("seed_count"))
    throw ConfigError("[experiment] gives both seeds and seed_count");
  if (exp->contains("seeds")) {
    for (auto s : get_sizes(*exp, "seeds", {}, "experiment")) cfg.seeds.push_back(s);
  } else {
    const auto n = get_count(*exp, "seed_count", 1, "experiment");
    for (std::size_t i = 0; i < n; ++i) cfg.seeds.push_back(i);
  }
  cfg.life_cycles = get_count(*exp, "life_cycles", cfg.life_cycles, "experiment");
  cfg.max_steps = get_count(*exp, "max_steps", cfg.max_steps, "experiment");
  cfg.save_checkpoints = get_bool(*exp, "save_checkpoints", cfg.save_checkpoints, "experiment");

  if (const auto* env = root.get_as<toml::table>("environment")) {
    cfg.environment = envs::env_spec_from_toml(*env);
  } else if (root.contains("environment")) {
    throw ConfigError("[environment] must be a table");
  }

  const auto* agents = root.get_as<toml::array>("agents");
  if (!agents) throw ConfigError("no [[agents]] given");
  for (std::size_t i = 0; i < agents->size(); ++i) {
    const auto* t = (*agents)[i].as_table();
    if (!t) throw ConfigError("[[agents]] entries must be tables");
    cfg.agents.push_back(parse_agent(*t, i));
  }

  if (const auto* ev = root.get_as<toml::table>("eval")) {
    reject_unknown(*ev, {"life_cycles", "environment"}, "[eval]");
    EvalSpec e;
    e.life_cycles = get_count(*ev, "life_cycles", e.life_cycles, "eval");
    const auto* env = ev->get_as<toml::table>("environment");
    if (!env) throw ConfigError("[eval] needs an [eval.environment] table");
    e.environment = envs::env_spec_from_toml(*env);
    cfg.eval = std::move(e);
  }
  cfg.validate();
  return cfg;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (!plain_label(name)) throw ConfigError("experiment name must be non-empty and free of commas and quotes");
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (life_cycles < 1) throw ConfigError("life_cycles must be >= 1");
  if (agents.empty()) throw ConfigError("at least one agent is required");
  std::set<std::string> labels;
  for (const auto& a : agents) {
    if (!plain_label(a.label)) throw ConfigError("agent label '" + a.label + "' must be non-empty and free of commas");
    if (!labels.insert(a.label).second) throw ConfigError("duplicate agent label '" + a.label + "'");
    a.config.validate();
  }
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
    throw ConfigError("seeds must be distinct");
  if (eval && eval->life_cycles < 1) throw ConfigError("eval.life_cycles must be >= 1");
}

ExperimentConfig parse_experiment_config(std::string_view toml_text, std::string_view source) {
  toml::table root;
  try {
    root = toml::parse(toml_text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "cannot parse " << source << ": " << e.description() << " (" << e.source().begin << ")";
    throw ConfigError(msg.str());
  }
  return from_table(root);
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config(buf.str(), path.string());
}

}  // namespace deepex::harness
