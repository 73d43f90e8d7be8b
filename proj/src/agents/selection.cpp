#include "deepex/agents/selection.hpp"

#include <cmath>
#include <string>

#include "deepex/errors.hpp"

namespace deepex::agents {
namespace {

void require_allowed(std::span<const ActionId> allowed) {
  if (allowed.empty()) throw ContractViolation("action selection with an empty allowed set");
}

Eigen::VectorXd q_values(const nn::DenseNet& q, const Eigen::MatrixXd& inputs) {
  return nn::forward(q, inputs).row(0).transpose();
}

}  // namespace

ActionId argmax_action(std::span<const ActionId> allowed, const Eigen::VectorXd& scores) {
  require_allowed(allowed);
  if (static_cast<std::size_t>(scores.size()) != allowed.size())
    throw ShapeError("argmax_action: one score per allowed action required");
  std::size_t best = 0;
  for (std::size_t j = 1; j < allowed.size(); ++j) {
    const double s = scores[static_cast<Eigen::Index>(j)];
    const double b = scores[static_cast<Eigen::Index>(best)];
    if (s > b || (s == b && allowed[j] < allowed[best])) best = j;
  }
  return allowed[best];
}

Scored dqn_select(const nn::DenseNet& q, const Eigen::VectorXd& user, const FeatureTable& table,
                  const Eigen::VectorXd& interact, std::span<const ActionId> allowed) {
  require_allowed(allowed);
  Scored s;
  s.scores = q_values(q, candidate_inputs(user, table, interact, allowed));
  s.action = argmax_action(allowed, s.scores);
  return s;
}

Scored epsilon_greedy_select(const nn::DenseNet& q, const Eigen::VectorXd& user, const FeatureTable& table,
                             const Eigen::VectorXd& interact, std::span<const ActionId> allowed, double epsilon,
                             Rng& rng) {
  require_allowed(allowed);
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must lie in [0, 1]");
  Scored s = dqn_select(q, user, table, interact, allowed);
  if (epsilon > 0.0) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng) < epsilon) {
      std::uniform_int_distribution<std::size_t> pick(0, allowed.size() - 1);
      s.action = allowed[pick(rng)];
    }
  }
  return s;
}

Scored rvf_select(const enn::EnnParams& enn, const std::optional<enn::EpistemicIndex>& z,
                  const Eigen::VectorXd& user, const FeatureTable& table, const Eigen::VectorXd& interact,
                  std::span<const ActionId> allowed) {
  require_allowed(allowed);
  if (!z) throw UsageError("rvf_select: epistemic index not set for this life-cycle");
  Scored s;
  s.scores = enn::enn_forward_batch(enn, candidate_inputs(user, table, interact, allowed), *z);
  s.action = argmax_action(allowed, s.scores);
  return s;
}

LastLayerStats::LastLayerStats(std::size_t dim, double ridge) : ridge_(ridge) {
  if (dim == 0) throw ConfigError("last-layer statistics need a positive dimension");
  if (!(ridge > 0.0)) throw ConfigError("ridge lambda must be positive");
  const auto d = static_cast<Eigen::Index>(dim);
  covariance_ = ridge * Eigen::MatrixXd::Identity(d, d);
  inverse_ = (1.0 / ridge) * Eigen::MatrixXd::Identity(d, d);
  response_ = Eigen::VectorXd::Zero(d);
}

double LastLayerStats::variance(const Eigen::VectorXd& phi) const {
  if (phi.size() != covariance_.rows()) throw ShapeError("last-layer feature dimension mismatch");
  return std::max(0.0, phi.dot(inverse_ * phi));
}

void LastLayerStats::update(const Eigen::VectorXd& phi, double reward) {
  if (phi.size() != covariance_.rows()) throw ShapeError("last-layer feature dimension mismatch");
  if (!phi.allFinite() || !std::isfinite(reward)) throw NumericError("non-finite last-layer update");
  covariance_.noalias() += phi * phi.transpose();
  const Eigen::VectorXd u = inverse_ * phi;
  const double denom = 1.0 + phi.dot(u);
  if (!(denom > 0.0)) throw NumericError("Sherman-Morrison update lost positive definiteness");
  inverse_.noalias() -= (u * u.transpose()) / denom;
  response_ += reward * phi;
}

Eigen::MatrixXd last_layer_features(const nn::DenseNet& q, const Eigen::MatrixXd& inputs) {
  nn::ForwardCache cache;
  nn::forward(q, inputs, &cache);
  return cache.representation();
}

namespace {

struct Candidates {
  Eigen::VectorXd q;
  Eigen::MatrixXd phi;
};

Candidates evaluate(const nn::DenseNet& q, const Eigen::VectorXd& user, const FeatureTable& table,
                    const Eigen::VectorXd& interact, std::span<const ActionId> allowed) {
  nn::ForwardCache cache;
  const Eigen::MatrixXd out = nn::forward(q, candidate_inputs(user, table, interact, allowed), &cache);
  return {out.row(0).transpose(), cache.representation()};
}

}  // namespace

Scored neural_ts_select(const nn::DenseNet& q, const LastLayerStats& stats, const Eigen::VectorXd& user,
                        const FeatureTable& table, const Eigen::VectorXd& interact,
                        std::span<const ActionId> allowed, double nu, Rng& rng) {
  require_allowed(allowed);
  if (!(nu >= 0.0)) throw ConfigError("thompson scale must be non-negative");
  const auto c = evaluate(q, user, table, interact, allowed);
  Scored s;
  s.scores = c.q;
  if (nu > 0.0) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index j = 0; j < s.scores.size(); ++j)
      s.scores[j] += nu * std::sqrt(stats.variance(c.phi.col(j))) * normal(rng);
  }
  s.action = argmax_action(allowed, s.scores);
  return s;
}

Scored neural_ucb_select(const nn::DenseNet& q, const LastLayerStats& stats, const Eigen::VectorXd& user,
                         const FeatureTable& table, const Eigen::VectorXd& interact,
                         std::span<const ActionId> allowed, double scale) {
  require_allowed(allowed);
  if (!(scale >= 0.0)) throw ConfigError("ucb scale must be non-negative");
  const auto c = evaluate(q, user, table, interact, allowed);
  Scored s;
  s.scores = c.q;
  if (scale > 0.0)
    for (Eigen::Index j = 0; j < s.scores.size(); ++j) s.scores[j] += scale * std::sqrt(stats.variance(c.phi.col(j)));
  s.action = argmax_action(allowed, s.scores);
  return s;
}

Scored neural_linucb_select(const nn::DenseNet& q, const LastLayerStats& stats, const Eigen::VectorXd& user,
                            const FeatureTable& table, const Eigen::VectorXd& interact,
                            std::span<const ActionId> allowed, double scale) {
  require_allowed(allowed);
  if (!(scale >= 0.0)) throw ConfigError("ucb scale must be non-negative");
  const auto c = evaluate(q, user, table, interact, allowed);
  const Eigen::VectorXd theta = stats.theta();
  Scored s;
  s.scores = c.phi.transpose() * theta;
  for (Eigen::Index j = 0; j < s.scores.size(); ++j) s.scores[j] += scale * std::sqrt(stats.variance(c.phi.col(j)));
  s.action = argmax_action(allowed, s.scores);
  return s;
}

bool LifecycleIndexStore::refresh(UserId user, bool at_boundary, Rng& rng) {
  auto it = indices_.find(user);
  if (it != indices_.end() && !at_boundary) return false;
  indices_.insert_or_assign(user, enn::sample_index(spec_, rng));
  ++resamples_;
  return true;
}

const std::optional<enn::EpistemicIndex> LifecycleIndexStore::get(UserId user) const {
  auto it = indices_.find(user);
  if (it == indices_.end()) return std::nullopt;
  return it->second;
}

std::vector<double> store_perturbed(std::span<ReplayBuffer> buffers, const Transition& t, double sigma, Rng& rng) {
  if (!(sigma >= 0.0)) throw ConfigError("reward perturbation sigma must be non-negative");
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> draws;
  draws.reserve(buffers.size());
  for (auto& buffer : buffers) {
    const double w = sigma > 0.0 ? sigma * noise(rng) : 0.0;
    Transition copy = t;
    copy.reward = t.true_reward + w;
    buffer.push(std::move(copy));
    draws.push_back(w);
  }
  return draws;
}

}  // namespace deepex::agents
