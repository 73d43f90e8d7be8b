#include "deepex/enn/index.hpp"

#include <cstdio>
#include <cstring>

#include "deepex/errors.hpp"

namespace deepex::enn {

EpistemicIndex sample_index(const IndexSpec& spec, Rng& rng) {
  if (spec.size == 0) throw ConfigError("epistemic index size must be positive");
  if (spec.kind == IndexSpec::Kind::kEnsemble) {
    std::uniform_int_distribution<std::size_t> pick(0, spec.size - 1);
    return ParticleIndex{pick(rng)};
  }
  return Eigen::VectorXd(sample_index_batch(spec.size, 1, rng).col(0));
}

Eigen::MatrixXd sample_index_batch(std::size_t dim, std::size_t count, Rng& rng) {
  if (dim == 0) throw ConfigError("epistemic index dimension must be positive");
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd z(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(count));
  for (Eigen::Index j = 0; j < z.cols(); ++j)
    for (Eigen::Index i = 0; i < z.rows(); ++i) z(i, j) = normal(rng);
  return z;
}

std::string index_digest(const EpistemicIndex& z) {
  char buf[32];
  if (const auto* p = std::get_if<ParticleIndex>(&z)) {
    std::snprintf(buf, sizeof buf, "p%zu", p->id);
    return buf;
  }
  const auto& v = std::get<Eigen::VectorXd>(z);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    unsigned char bytes[sizeof(double)];
    const double d = v[i];
    std::memcpy(bytes, &d, sizeof d);
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 0x100000001b3ULL;
    }
  }
  std::snprintf(buf, sizeof buf, "v%016llx", static_cast<unsigned long long>(h));
  return buf;
}

bool indices_equal(const EpistemicIndex& a, const EpistemicIndex& b) {
  if (a.index() != b.index()) return false;
  if (const auto* p = std::get_if<ParticleIndex>(&a)) return *p == std::get<ParticleIndex>(b);
  const auto& va = std::get<Eigen::VectorXd>(a);
  const auto& vb = std::get<Eigen::VectorXd>(b);
  return va.size() == vb.size() && va == vb;
}

}  // namespace deepex::enn
