#pragma once

#include <cstddef>
#include <string>
#include <variant>

#include <Eigen/Dense>

#include "deepex/rng.hpp"

namespace deepex::enn {

/// Zero-based particle id of an ensemble member.
struct ParticleIndex {
  std::size_t id = 0;
  friend bool operator==(ParticleIndex, ParticleIndex) = default;
};

/// Selects one posterior sample of an epistemic network: a particle for an
/// ensemble, a real vector for an EpiNet.
using EpistemicIndex = std::variant<ParticleIndex, Eigen::VectorXd>;

struct IndexSpec {
  enum class Kind { kEnsemble, kEpinet };
  Kind kind = Kind::kEpinet;
  std::size_t size = 1;  // ensemble size M, or index dimension d_z

  static IndexSpec ensemble(std::size_t m) { return {Kind::kEnsemble, m}; }
  static IndexSpec epinet(std::size_t dim) { return {Kind::kEpinet, dim}; }
};

/// Uniform particle for ensembles, standard normal vector for EpiNets.
EpistemicIndex sample_index(const IndexSpec& spec, Rng& rng);

/// Draws `count` standard normal indices as the columns of a d_z x count matrix.
Eigen::MatrixXd sample_index_batch(std::size_t dim, std::size_t count, Rng& rng);

/// Short stable hex digest, used in decision logs.
std::string index_digest(const EpistemicIndex& z);

bool indices_equal(const EpistemicIndex& a, const EpistemicIndex& b);

}  // namespace deepex::enn
