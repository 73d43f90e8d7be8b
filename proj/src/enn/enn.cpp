#include "deepex/enn/enn.hpp"

#include <string>

#include "deepex/errors.hpp"

namespace deepex::enn {
namespace {

void check_scale(double prior_scale) {
  if (!(prior_scale >= 0.0 && prior_scale < 1.0))
    throw ConfigError("prior_scale must lie in [0, 1), got " + std::to_string(prior_scale));
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

// ---------------------------------------------------------------- ensemble

EnsembleNet::EnsembleNet(std::vector<nn::DenseNet> base, std::vector<nn::DenseNet> priors, double prior_scale)
    : base_(std::move(base)), priors_(std::move(priors)), prior_scale_(prior_scale) {
  check_scale(prior_scale_);
  if (base_.empty()) throw ConfigError("ensemble needs at least one particle");
  if (base_.size() != priors_.size()) throw ConfigError("ensemble needs one prior per base network");
  for (std::size_t m = 0; m < base_.size(); ++m) {
    if (base_[m].input_size() != base_[0].input_size() || priors_[m].input_size() != base_[0].input_size())
      throw ShapeError("ensemble members must share their input size");
    if (base_[m].output_size() != 1 || priors_[m].output_size() != 1)
      throw ShapeError("ensemble members must produce a scalar");
  }
  prior_checksum_at_init_ = prior_checksum();
}

EnsembleNet EnsembleNet::create(std::span<const std::size_t> layer_sizes, std::size_t ensemble_size,
                                double prior_scale, Rng& rng) {
  if (ensemble_size == 0) throw ConfigError("ensemble size must be positive");
  std::vector<nn::DenseNet> base, priors;
  for (std::size_t m = 0; m < ensemble_size; ++m) {
    base.push_back(nn::glorot_init(layer_sizes, rng));
    priors.push_back(nn::glorot_init(layer_sizes, rng));
  }
  return EnsembleNet(std::move(base), std::move(priors), prior_scale);
}

std::uint64_t EnsembleNet::prior_checksum() const {
  std::uint64_t h = 0;
  for (const auto& p : priors_) h = mix64(h ^ p.checksum());
  return h;
}

EnsembleNet::Pass EnsembleNet::run(const Eigen::MatrixXd& inputs, std::size_t particle) const {
  if (particle >= size())
    throw UsageError("particle " + std::to_string(particle) + " out of range for ensemble of " +
                     std::to_string(size()));
  Pass pass;
  pass.particle = particle;
  const Eigen::MatrixXd out = nn::forward(base_[particle], inputs, &pass.base_cache);
  pass.values = out.row(0).transpose();
  if (prior_scale_ != 0.0) pass.values += prior_scale_ * nn::forward(priors_[particle], inputs).row(0).transpose();
  return pass;
}

Eigen::VectorXd EnsembleNet::forward(const Eigen::MatrixXd& inputs, std::size_t particle) const {
  return run(inputs, particle).values;
}

double EnsembleNet::forward(const Eigen::VectorXd& x, std::size_t particle) const {
  return forward(Eigen::MatrixXd(x), particle)[0];
}

nn::Gradients EnsembleNet::gradient(const Pass& pass, const Eigen::VectorXd& upstream) const {
  if (upstream.size() != pass.values.size()) throw ShapeError("ensemble gradient: upstream size mismatch");
  return nn::backward(base_[pass.particle], pass.base_cache, upstream.transpose()).params;
}

nn::Gradients EnsembleNet::particle_gradient(const Eigen::MatrixXd& inputs, std::size_t particle,
                                             const Eigen::VectorXd& upstream) const {
  return gradient(run(inputs, particle), upstream);
}

void EnsembleNet::copy_trainable_from(const EnsembleNet& other) {
  if (other.size() != size()) throw ShapeError("ensemble target sync: size mismatch");
  base_ = other.base_;
}

// ---------------------------------------------------------------- epinet

EpiNet::EpiNet(nn::DenseNet base, nn::DenseNet head, nn::DenseNet prior_head, double prior_scale,
               std::size_t index_dim)
    : base_(std::move(base)),
      head_(std::move(head)),
      prior_head_(std::move(prior_head)),
      prior_scale_(prior_scale),
      index_dim_(index_dim) {
  check_scale(prior_scale_);
  if (index_dim_ == 0) throw ConfigError("epinet index dimension must be positive");
  if (base_.num_layers() < 2) throw ConfigError("epinet base network needs a hidden layer");
  if (base_.output_size() != 1) throw ShapeError("epinet base network must produce a scalar");
  const std::size_t head_in = base_.representation_size() + index_dim_;
  for (const auto* h : {&head_, &prior_head_}) {
    if (h->input_size() != head_in)
      throw ShapeError("epinet head input must be representation + index (" + std::to_string(head_in) + ")");
    if (h->output_size() != index_dim_) throw ShapeError("epinet head output must equal the index dimension");
  }
  prior_checksum_at_init_ = prior_checksum();
}

EpiNet EpiNet::create(std::span<const std::size_t> base_sizes, std::span<const std::size_t> head_hidden,
                      std::size_t index_dim, double prior_scale, Rng& rng) {
  if (base_sizes.size() < 3) throw ConfigError("epinet base network needs a hidden layer");
  nn::DenseNet base = nn::glorot_init(base_sizes, rng);
  std::vector<std::size_t> head_sizes;
  head_sizes.push_back(base.representation_size() + index_dim);
  head_sizes.insert(head_sizes.end(), head_hidden.begin(), head_hidden.end());
  head_sizes.push_back(index_dim);
  nn::DenseNet head = nn::glorot_init(head_sizes, rng);
  nn::DenseNet prior_head = nn::glorot_init(head_sizes, rng);
  return EpiNet(std::move(base), std::move(head), std::move(prior_head), prior_scale, index_dim);
}

namespace {

// First-layer pre-activation of a head over every (representation b, index k)
// pair, column b + B k. The affine map splits over the two input blocks, so it
// is formed from one product per block instead of one over every pair.
Eigen::MatrixXd head_preactivation(const nn::DenseNet& head, const Eigen::MatrixXd& representation,
                                   const Eigen::MatrixXd& indices) {
  const auto& first = head.layers().front();
  const Eigen::Index batch = representation.cols();
  const Eigen::MatrixXd from_rep = first.weight.leftCols(representation.rows()) * representation;
  Eigen::MatrixXd from_index = first.weight.rightCols(indices.rows()) * indices;
  from_index.colwise() += first.bias;
  Eigen::MatrixXd pre(first.weight.rows(), batch * indices.cols());
  for (Eigen::Index k = 0; k < indices.cols(); ++k)
    pre.middleCols(k * batch, batch) = from_rep.colwise() + from_index.col(k);
  return pre;
}

}  // namespace

EpiNet::Pass EpiNet::run(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& indices) const {
  if (static_cast<std::size_t>(indices.rows()) != index_dim_)
    throw UsageError("epinet index has dimension " + std::to_string(indices.rows()) + ", expected " +
                     std::to_string(index_dim_));
  Pass pass;
  pass.indices = indices;
  const Eigen::RowVectorXd f = nn::forward(base_, inputs, &pass.base_cache).row(0);
  const auto& rep = pass.base_cache.representation();
  Eigen::MatrixXd g = nn::forward_from_preactivation(head_, head_preactivation(head_, rep, indices), &pass.head_cache);
  if (prior_scale_ != 0.0)
    g += prior_scale_ * nn::forward_from_preactivation(prior_head_, head_preactivation(prior_head_, rep, indices));

  const Eigen::Index batch = inputs.cols();
  pass.values.resize(batch, indices.cols());
  for (Eigen::Index k = 0; k < indices.cols(); ++k)
    pass.values.col(k) = f.transpose() + g.middleCols(k * batch, batch).transpose() * indices.col(k);
  return pass;
}

Eigen::MatrixXd EpiNet::forward(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& indices) const {
  return run(inputs, indices).values;
}

double EpiNet::forward(const Eigen::VectorXd& x, const Eigen::VectorXd& z) const {
  return forward(Eigen::MatrixXd(x), Eigen::MatrixXd(z))(0, 0);
}

EpiNet::Gradient EpiNet::gradient(const Pass& pass, const Eigen::MatrixXd& upstream) const {
  if (upstream.rows() != pass.values.rows() || upstream.cols() != pass.values.cols())
    throw ShapeError("epinet gradient: upstream shape mismatch");
  const Eigen::Index batch = upstream.rows();
  Gradient grad;
  // Residual path f(x): every index contributes its upstream.
  grad.base = nn::backward(base_, pass.base_cache, upstream.rowwise().sum().transpose()).params;
  // Head path: d/dg of g^T z is z. The representation input is a constant here.
  Eigen::MatrixXd head_up(static_cast<Eigen::Index>(index_dim_), batch * upstream.cols());
  for (Eigen::Index k = 0; k < upstream.cols(); ++k)
    head_up.middleCols(k * batch, batch) = pass.indices.col(k) * upstream.col(k).transpose();
  auto head = nn::backward(head_, pass.head_cache, head_up);
  grad.head = std::move(head.params);

  // First head layer, from the split affine map: the representation block
  // sees each index's delta summed, the index block each sample's.
  const auto& rep = pass.base_cache.representation();
  const Eigen::MatrixXd& delta = head.first_delta;
  Eigen::MatrixXd over_indices = Eigen::MatrixXd::Zero(delta.rows(), batch);
  Eigen::MatrixXd over_batch(delta.rows(), upstream.cols());
  for (Eigen::Index k = 0; k < upstream.cols(); ++k) {
    const auto block = delta.middleCols(k * batch, batch);
    over_indices += block;
    over_batch.col(k) = block.rowwise().sum();
  }
  auto& first = grad.head.layers.front();
  first.weight.leftCols(rep.rows()) = over_indices * rep.transpose();
  first.weight.rightCols(pass.indices.rows()) = over_batch * pass.indices.transpose();
  first.bias = over_batch.rowwise().sum();
  return grad;
}

void EpiNet::copy_trainable_from(const EpiNet& other) {
  if (other.base_.layer_sizes() != base_.layer_sizes() || other.head_.layer_sizes() != head_.layer_sizes())
    throw ShapeError("epinet target sync: shape mismatch");
  base_ = other.base_;
  head_ = other.head_;
}

// ---------------------------------------------------------------- variant API

IndexSpec index_spec(const EnnParams& params) {
  return std::visit(Overloaded{[](const EnsembleNet& e) { return IndexSpec::ensemble(e.size()); },
                               [](const EpiNet& e) { return IndexSpec::epinet(e.index_dim()); }},
                    params);
}

std::size_t input_size(const EnnParams& params) {
  return std::visit([](const auto& p) { return p.input_size(); }, params);
}

Eigen::VectorXd enn_forward_batch(const EnnParams& params, const Eigen::MatrixXd& inputs, const EpistemicIndex& z) {
  if (const auto* ens = std::get_if<EnsembleNet>(&params)) {
    const auto* particle = std::get_if<ParticleIndex>(&z);
    if (!particle) throw UsageError("ensemble evaluated with a vector epistemic index");
    return ens->forward(inputs, particle->id);
  }
  const auto& epi = std::get<EpiNet>(params);
  const auto* vec = std::get_if<Eigen::VectorXd>(&z);
  if (!vec) throw UsageError("epinet evaluated with a particle epistemic index");
  return epi.forward(inputs, Eigen::MatrixXd(*vec)).col(0);
}

double enn_forward(const EnnParams& params, const Eigen::VectorXd& x, const EpistemicIndex& z) {
  return enn_forward_batch(params, Eigen::MatrixXd(x), z)[0];
}

std::vector<nn::Gradients> enn_grad(const EnnParams& params, const Eigen::VectorXd& x, const EpistemicIndex& z,
                                    double upstream) {
  const Eigen::MatrixXd input(x);
  if (const auto* ens = std::get_if<EnsembleNet>(&params)) {
    const auto* particle = std::get_if<ParticleIndex>(&z);
    if (!particle) throw UsageError("ensemble differentiated with a vector epistemic index");
    std::vector<nn::Gradients> grads;
    for (std::size_t m = 0; m < ens->size(); ++m) grads.push_back(nn::Gradients::zeros_like(ens->base(m)));
    grads.at(particle->id) = ens->particle_gradient(input, particle->id, Eigen::VectorXd::Constant(1, upstream));
    return grads;
  }
  const auto& epi = std::get<EpiNet>(params);
  const auto* vec = std::get_if<Eigen::VectorXd>(&z);
  if (!vec) throw UsageError("epinet differentiated with a particle epistemic index");
  auto g = epi.gradient(epi.run(input, Eigen::MatrixXd(*vec)), Eigen::MatrixXd::Constant(1, 1, upstream));
  std::vector<nn::Gradients> grads;
  grads.push_back(std::move(g.base));
  grads.push_back(std::move(g.head));
  return grads;
}

std::vector<nn::DenseNet*> trainable_nets(EnnParams& params) {
  std::vector<nn::DenseNet*> nets;
  if (auto* ens = std::get_if<EnsembleNet>(&params)) {
    for (auto& n : ens->trainable()) nets.push_back(&n);
  } else {
    auto& epi = std::get<EpiNet>(params);
    nets.push_back(&epi.mutable_base());
    nets.push_back(&epi.mutable_head());
  }
  return nets;
}

std::vector<const nn::DenseNet*> trainable_nets(const EnnParams& params) {
  std::vector<const nn::DenseNet*> nets;
  if (const auto* ens = std::get_if<EnsembleNet>(&params)) {
    for (const auto& n : ens->trainable()) nets.push_back(&n);
  } else {
    const auto& epi = std::get<EpiNet>(params);
    nets.push_back(&epi.base());
    nets.push_back(&epi.head());
  }
  return nets;
}

bool priors_intact(const EnnParams& params) {
  return std::visit([](const auto& p) { return p.priors_intact(); }, params);
}

std::uint64_t prior_checksum(const EnnParams& params) {
  return std::visit([](const auto& p) { return p.prior_checksum(); }, params);
}

std::uint64_t trainable_checksum(const EnnParams& params) {
  std::uint64_t h = 0;
  for (const auto* n : trainable_nets(params)) h = mix64(h ^ n->checksum());
  return h;
}

std::vector<nn::Optimizer> make_optimizers(const EnnParams& params, const nn::OptimizerConfig& config) {
  std::vector<nn::Optimizer> opts;
  for (const auto* n : trainable_nets(params)) opts.emplace_back(config, *n);
  return opts;
}

}  // namespace deepex::enn
