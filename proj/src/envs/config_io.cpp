#include "deepex/envs/config_io.hpp"

#include <toml.hpp>

#include "deepex/envs/streak_toy.hpp"
#include "deepex/errors.hpp"

namespace deepex::envs {
namespace {

template <class T>
T get_or(const toml::table& t, std::string_view key, T fallback) {
  const auto* node = t.get(key);
  if (!node) return fallback;
  if (auto v = node->value<T>()) return *v;
  throw ConfigError("environment key '" + std::string(key) + "' has the wrong type");
}

Eigen::VectorXd read_vector(const toml::node& node, std::string_view what) {
  const auto* arr = node.as_array();
  if (!arr) throw ConfigError(std::string(what) + " must be an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(arr->size()));
  for (std::size_t i = 0; i < arr->size(); ++i) {
    auto x = (*arr)[i].value<double>();
    if (!x) throw ConfigError(std::string(what) + " must contain only numbers");
    v[static_cast<Eigen::Index>(i)] = *x;
  }
  return v;
}

ActionId parse_action(const std::string& name) {
  if (name == "a1") return kA1;
  if (name == "a2") return kA2;
  throw ConfigError("preferred action must be \"a1\" or \"a2\", got \"" + name + "\"");
}

SeqRecUser parse_user(const toml::table& t) {
  SeqRecUser u;
  const auto id = get_or<std::int64_t>(t, "id", -1);
  if (id < 0) throw ConfigError("every roster user needs a non-negative id");
  u.id = static_cast<UserId>(id);
  u.budget = static_cast<int>(get_or<std::int64_t>(t, "budget", 10));
  u.target = get_or<double>(t, "target", static_cast<double>(u.budget));
  if (const auto* g = t.get("g")) {
    const auto delta = read_vector(*g, "g");
    if (delta.size() != 2) throw ConfigError("g must list exactly [g(a1), g(a2)]");
    u.delta = {delta[0], delta[1]};
  }
  u.preferred = u.delta[0] > u.delta[1] ? kA1 : kA2;
  if (const auto* p = t.get("preferred")) {
    auto name = p->value<std::string>();
    if (!name) throw ConfigError("preferred must be a string");
    u.preferred = parse_action(*name);
  }
  if (const auto* f = t.get("features")) u.features = read_vector(*f, "features");
  return u;
}

}  // namespace

SeqRecConfig EnvSpec::resolve_roster(std::uint64_t run_seed) const {
  if (roster) return *roster;
  if (spawn) {
    Rng rng = spawn_seed ? Rng(derive_seed(*spawn_seed, "roster")) : make_rng(run_seed, "roster");
    return multi_user_spawn(*spawn, rng);
  }
  return SeqRecConfig::toy(toy_horizon);
}

std::unique_ptr<Environment> EnvSpec::make(std::uint64_t run_seed) const {
  if (kind == Kind::kStreak) return std::make_unique<StreakToyEnv>();
  return std::make_unique<SeqRecEnv>(resolve_roster(run_seed));
}

std::optional<std::vector<UserId>> EnvSpec::fixed_user_ids() const {
  if (kind == Kind::kStreak) return std::vector<UserId>{0};
  if (spawn && !spawn_seed) {
    std::vector<UserId> ids;
    for (std::size_t i = 0; i < spawn->users; ++i) ids.push_back(spawn->id_offset + i);
    return ids;
  }
  std::vector<UserId> ids;
  for (const auto& u : resolve_roster(0).users) ids.push_back(u.id);
  return ids;
}

EnvSpec env_spec_from_toml(const toml::table& table) {
  EnvSpec spec;
  const auto kind = get_or<std::string>(table, "kind", "seqrec");
  if (kind == "seqrec") {
    spec.kind = EnvSpec::Kind::kSeqRec;
  } else if (kind == "streak") {
    spec.kind = EnvSpec::Kind::kStreak;
    return spec;
  } else {
    throw ConfigError("unknown environment kind '" + kind + "'");
  }
  spec.toy_horizon = static_cast<int>(get_or<std::int64_t>(table, "horizon", 10));
  if (spec.toy_horizon < 1) throw ConfigError("environment horizon must be >= 1");

  if (const auto* users = table.get_as<toml::array>("users")) {
    SeqRecConfig roster;
    for (const auto& node : *users) {
      const auto* t = node.as_table();
      if (!t) throw ConfigError("[[users]] entries must be tables");
      roster.users.push_back(parse_user(*t));
    }
    roster.validate();
    spec.roster = std::move(roster);
  }
  if (const auto* s = table.get_as<toml::table>("spawn")) {
    if (spec.roster) throw ConfigError("environment gives both an explicit roster and a spawn rule");
    SpawnOptions o;
    const auto users = get_or<std::int64_t>(*s, "users", 20);
    if (users < 1) throw ConfigError("spawn.users must be >= 1");
    o.users = static_cast<std::size_t>(users);
    o.horizon = static_cast<int>(get_or<std::int64_t>(*s, "horizon", spec.toy_horizon));
    o.id_offset = static_cast<std::size_t>(get_or<std::int64_t>(*s, "id_offset", 0));
    o.id_slots = static_cast<std::size_t>(get_or<std::int64_t>(*s, "id_slots", 0));
    o.preference_dims = static_cast<std::size_t>(get_or<std::int64_t>(*s, "preference_dims", 4));
    o.include_user_features = get_or<bool>(*s, "include_user_features", true);
    if (const auto* seed = s->get("seed")) {
      auto v = seed->value<std::int64_t>();
      if (!v || *v < 0) throw ConfigError("spawn.seed must be a non-negative integer");
      spec.spawn_seed = static_cast<std::uint64_t>(*v);
    }
    spec.spawn = o;
  }
  return spec;
}

EnvSpec load_env_spec(const std::filesystem::path& path) {
  toml::table root;
  try {
    root = toml::parse_file(path.string());
  } catch (const toml::parse_error& e) {
    throw ConfigError("cannot parse " + path.string() + ": " + std::string(e.description()));
  }
  const auto* env = root.get_as<toml::table>("environment");
  if (!env) throw ConfigError(path.string() + " has no [environment] table");
  return env_spec_from_toml(*env);
}

}  // namespace deepex::envs
