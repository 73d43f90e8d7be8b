#include "deepex/agents/td.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "deepex/errors.hpp"

namespace deepex::agents {
namespace {

void check_loss(double loss) {
  if (!std::isfinite(loss)) throw NumericError("TD loss is not finite (" + std::to_string(loss) + ")");
}

Eigen::VectorXd plain_values(const nn::DenseNet& net, const Eigen::MatrixXd& inputs) {
  if (inputs.cols() == 0) return Eigen::VectorXd(0);
  return nn::forward(net, inputs).row(0).transpose();
}

Eigen::VectorXd particle_values(const enn::EnsembleNet& net, const Eigen::MatrixXd& inputs, std::size_t m) {
  if (inputs.cols() == 0) return Eigen::VectorXd(0);
  return net.forward(inputs, m);
}

Eigen::MatrixXd epinet_values(const enn::EpiNet& net, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& z) {
  if (inputs.cols() == 0) return Eigen::MatrixXd(0, z.cols());
  return net.forward(inputs, z);
}

void check_batches(const enn::EnsembleNet& net, std::span<const TdBatch> batches) {
  if (batches.size() != net.size())
    throw ShapeError("ensemble TD update needs one batch per particle (" + std::to_string(net.size()) + ")");
}

}  // namespace

TdBatch make_td_batch(std::span<const Transition* const> transitions, const FeatureTable& table) {
  if (transitions.empty()) throw UsageError("TD update with an empty batch");
  const auto& first = *transitions.front();
  const Eigen::Index d = first.user_features.size() + static_cast<Eigen::Index>(table.dim()) + first.interact.size();
  const auto b_count = static_cast<Eigen::Index>(transitions.size());

  TdBatch batch;
  batch.inputs.resize(d, b_count);
  batch.rewards.resize(b_count);
  batch.terminal.resize(transitions.size());
  Eigen::Index c_count = 0;
  for (const auto* t : transitions)
    if (!t->terminal) c_count += static_cast<Eigen::Index>(t->next_allowed.size());
  batch.next_inputs.resize(d, c_count);
  batch.next_owner.reserve(static_cast<std::size_t>(c_count));

  Eigen::Index c = 0;
  for (Eigen::Index b = 0; b < b_count; ++b) {
    const auto& t = *transitions[static_cast<std::size_t>(b)];
    batch.inputs.col(b) = network_input(t.user_features, t.action_features, t.interact);
    batch.rewards[b] = t.reward;
    batch.terminal[static_cast<std::size_t>(b)] = t.terminal;
    if (t.terminal) continue;
    if (t.next_allowed.empty()) throw UsageError("non-terminal transition without next actions");
    for (ActionId a : t.next_allowed) {
      batch.next_inputs.col(c) = network_input(t.user_features, table[a], t.next_interact);
      batch.next_owner.push_back(b);
      ++c;
    }
  }
  return batch;
}

Eigen::MatrixXd td_targets(const TdBatch& batch, const Eigen::MatrixXd& next_values) {
  const Eigen::Index k_count = next_values.cols();
  Eigen::MatrixXd best = Eigen::MatrixXd::Constant(batch.size(), k_count, -std::numeric_limits<double>::infinity());
  for (Eigen::Index c = 0; c < next_values.rows(); ++c) {
    const Eigen::Index b = batch.next_owner[static_cast<std::size_t>(c)];
    best.row(b) = best.row(b).cwiseMax(next_values.row(c));
  }
  Eigen::MatrixXd targets(batch.size(), k_count);
  for (Eigen::Index b = 0; b < batch.size(); ++b) {
    if (batch.terminal[static_cast<std::size_t>(b)]) {
      targets.row(b).setConstant(batch.rewards[b]);
    } else {
      targets.row(b) = best.row(b).array() + batch.rewards[b];
    }
  }
  return targets;
}

// ---------------------------------------------------------------- plain

double td_loss(const nn::DenseNet& online, const nn::DenseNet& target, const TdBatch& batch) {
  const Eigen::VectorXd y = td_targets(batch, plain_values(target, batch.next_inputs)).col(0);
  const double loss = (y - plain_values(online, batch.inputs)).squaredNorm();
  check_loss(loss);
  return loss;
}

nn::Gradients td_gradient(const nn::DenseNet& online, const nn::DenseNet& target, const TdBatch& batch) {
  const Eigen::VectorXd y = td_targets(batch, plain_values(target, batch.next_inputs)).col(0);
  nn::ForwardCache cache;
  const Eigen::VectorXd q = nn::forward(online, batch.inputs, &cache).row(0).transpose();
  const Eigen::VectorXd err = y - q;
  check_loss(err.squaredNorm());
  return nn::backward(online, cache, (-2.0 * err).transpose()).params;
}

double td_update(nn::DenseNet& online, const nn::DenseNet& target, const TdBatch& batch, nn::Optimizer& optimizer) {
  const Eigen::VectorXd y = td_targets(batch, plain_values(target, batch.next_inputs)).col(0);
  nn::ForwardCache cache;
  const Eigen::VectorXd q = nn::forward(online, batch.inputs, &cache).row(0).transpose();
  const Eigen::VectorXd err = y - q;
  const double loss = err.squaredNorm();
  check_loss(loss);
  optimizer.step(online, nn::backward(online, cache, (-2.0 * err).transpose()).params);
  return loss;
}

// ---------------------------------------------------------------- ensemble

double td_loss(const enn::EnsembleNet& online, const enn::EnsembleNet& target, std::span<const TdBatch> batches) {
  check_batches(online, batches);
  double loss = 0.0;
  for (std::size_t m = 0; m < online.size(); ++m) {
    const auto& batch = batches[m];
    const Eigen::VectorXd y = td_targets(batch, particle_values(target, batch.next_inputs, m)).col(0);
    loss += (y - online.forward(batch.inputs, m)).squaredNorm();
  }
  check_loss(loss);
  return loss;
}

std::vector<nn::Gradients> td_gradient(const enn::EnsembleNet& online, const enn::EnsembleNet& target,
                                       std::span<const TdBatch> batches) {
  check_batches(online, batches);
  std::vector<nn::Gradients> grads;
  for (std::size_t m = 0; m < online.size(); ++m) {
    const auto& batch = batches[m];
    const Eigen::VectorXd y = td_targets(batch, particle_values(target, batch.next_inputs, m)).col(0);
    const auto pass = online.run(batch.inputs, m);
    const Eigen::VectorXd err = y - pass.values;
    check_loss(err.squaredNorm());
    grads.push_back(online.gradient(pass, -2.0 * err));
  }
  return grads;
}

double td_update(enn::EnsembleNet& online, const enn::EnsembleNet& target, std::span<const TdBatch> batches,
                 std::span<nn::Optimizer> optimizers) {
  check_batches(online, batches);
  if (optimizers.size() != online.size()) throw ShapeError("ensemble TD update needs one optimizer per particle");
  double loss = 0.0;
  for (std::size_t m = 0; m < online.size(); ++m) {
    const auto& batch = batches[m];
    const Eigen::VectorXd y = td_targets(batch, particle_values(target, batch.next_inputs, m)).col(0);
    const auto pass = online.run(batch.inputs, m);
    const Eigen::VectorXd err = y - pass.values;
    const double l = err.squaredNorm();
    check_loss(l);
    loss += l;
    optimizers[m].step(online.trainable()[m], online.gradient(pass, -2.0 * err));
  }
  return loss;
}

// ---------------------------------------------------------------- epinet

double td_loss(const enn::EpiNet& online, const enn::EpiNet& target, const TdBatch& batch,
               const Eigen::MatrixXd& indices) {
  const Eigen::MatrixXd y = td_targets(batch, epinet_values(target, batch.next_inputs, indices));
  const double loss = (y - online.forward(batch.inputs, indices)).squaredNorm();
  check_loss(loss);
  return loss;
}

std::vector<nn::Gradients> td_gradient(const enn::EpiNet& online, const enn::EpiNet& target, const TdBatch& batch,
                                       const Eigen::MatrixXd& indices) {
  const Eigen::MatrixXd y = td_targets(batch, epinet_values(target, batch.next_inputs, indices));
  const auto pass = online.run(batch.inputs, indices);
  const Eigen::MatrixXd err = y - pass.values;
  check_loss(err.squaredNorm());
  auto g = online.gradient(pass, -2.0 * err);
  std::vector<nn::Gradients> grads;
  grads.push_back(std::move(g.base));
  grads.push_back(std::move(g.head));
  return grads;
}

double td_update(enn::EpiNet& online, const enn::EpiNet& target, const TdBatch& batch,
                 const Eigen::MatrixXd& indices, std::span<nn::Optimizer> optimizers) {
  if (optimizers.size() != 2) throw ShapeError("epinet TD update needs optimizers for base and head");
  const Eigen::MatrixXd y = td_targets(batch, epinet_values(target, batch.next_inputs, indices));
  const auto pass = online.run(batch.inputs, indices);
  const Eigen::MatrixXd err = y - pass.values;
  const double loss = err.squaredNorm();
  check_loss(loss);
  auto g = online.gradient(pass, -2.0 * err);
  optimizers[0].step(online.mutable_base(), g.base);
  optimizers[1].step(online.mutable_head(), g.head);
  return loss;
}

// ---------------------------------------------------------------- target sync

bool sync_target(nn::DenseNet& target, const nn::DenseNet& online, std::size_t update_count, std::size_t period) {
  if (period == 0) throw ConfigError("target sync period must be >= 1");
  if (update_count % period != 0) return false;
  target = online;
  return true;
}

bool sync_target(enn::EnsembleNet& target, const enn::EnsembleNet& online, std::size_t update_count,
                 std::size_t period) {
  if (period == 0) throw ConfigError("target sync period must be >= 1");
  if (update_count % period != 0) return false;
  target.copy_trainable_from(online);
  return true;
}

bool sync_target(enn::EpiNet& target, const enn::EpiNet& online, std::size_t update_count, std::size_t period) {
  if (period == 0) throw ConfigError("target sync period must be >= 1");
  if (update_count % period != 0) return false;
  target.copy_trainable_from(online);
  return true;
}

}  // namespace deepex::agents
