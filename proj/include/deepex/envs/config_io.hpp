#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "deepex/envs/environment.hpp"
#include "deepex/envs/seqrec.hpp"

namespace toml {
inline namespace v3 {
class table;
}
}  // namespace toml

namespace deepex::envs {

/// Declarative environment description, resolved into a concrete environment
/// per run.
struct EnvSpec {
  enum class Kind { kSeqRec, kStreak };
  Kind kind = Kind::kSeqRec;

  std::optional<SeqRecConfig> roster;      // explicit users
  std::optional<SpawnOptions> spawn;       // generated users
  std::optional<std::uint64_t> spawn_seed; // fixed roster; otherwise derived from the run seed
  int toy_horizon = 10;                    // used when neither roster nor spawn is given

  /// SeqRec roster for a run.
  SeqRecConfig resolve_roster(std::uint64_t run_seed) const;
  std::unique_ptr<Environment> make(std::uint64_t run_seed) const;

  /// Users known before any run (for roster-overlap checks); empty for rosters
  /// that depend on the run seed.
  std::optional<std::vector<UserId>> fixed_user_ids() const;
};

/// Parses an environment table:
///   kind = "seqrec" | "streak"
///   horizon = 10                     # single-user toy when no users/spawn
///   [spawn] users, horizon, id_offset, id_slots, preference_dims,
///           include_user_features, seed
///   [[users]] id, target, budget, g = [g_a1, g_a2], features = [...], preferred
EnvSpec env_spec_from_toml(const toml::table& table);

/// Loads the [environment] table of a TOML file.
EnvSpec load_env_spec(const std::filesystem::path& path);

}  // namespace deepex::envs
