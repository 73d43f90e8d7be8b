#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "deepex/enn/enn.hpp"

namespace deepex::enn {

/// Anything an agent can checkpoint: a plain value network or an epistemic one.
using ModelParams = std::variant<nn::DenseNet, EnsembleNet, EpiNet>;

struct Checkpoint {
  ModelParams model;
  nlohmann::json metadata = nlohmann::json::object();
};

inline constexpr std::uint32_t kCheckpointFormatVersion = 1;

/// Binary layout: 8-byte magic "DEEPEXCK", u32 format version, u64 header
/// length, JSON header describing every network's layer shapes, then all
/// parameters as little-endian IEEE-754 doubles in header order (weights
/// column-major, then bias, layer by layer).
std::vector<std::uint8_t> serialize(const Checkpoint& checkpoint);
Checkpoint deserialize(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Checksum over every parameter (trainable and frozen).
std::uint64_t model_checksum(const ModelParams& model);

}  // namespace deepex::enn
