#include <doctest.h>

#include <cmath>
#include <vector>

#include "deepex/enn/checkpoint.hpp"
#include "deepex/enn/enn.hpp"
#include "deepex/enn/index.hpp"
#include "deepex/errors.hpp"
#include "deepex/nncore/optimizer.hpp"
#include "epinet_oracle.hpp"
#include "fd_oracle.hpp"

using namespace deepex;
using enn::EnsembleNet;
using enn::EpiNet;
using testing::epinet_loss;
using testing::epinet_near_kink;
using testing::head_out;

namespace {

Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

void randomize_biases(nn::DenseNet& net, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 0.1);
  for (auto& l : net.mutable_layers())
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias[i] = normal(rng);
}

EpiNet small_epinet(Rng& rng, double scale = 0.3) {
  const std::vector<std::size_t> base{4, 5, 1}, head{6};
  auto e = EpiNet::create(base, head, 3, scale, rng);
  randomize_biases(e.mutable_base(), rng);
  randomize_biases(e.mutable_head(), rng);
  return e;
}

}  // namespace

TEST_CASE("sample_index: ensemble particles are uniform") {
  auto rng = make_rng(0, "index-uniform");
  const auto spec = enn::IndexSpec::ensemble(10);
  std::vector<int> counts(10, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++counts[std::get<enn::ParticleIndex>(enn::sample_index(spec, rng)).id];
  const double sigma = std::sqrt(0.1 * 0.9 / n);
  for (int c : counts) CHECK(std::abs(c / double(n) - 0.1) <= 3 * sigma);
}

TEST_CASE("sample_index: epinet index has the configured dimension") {
  auto rng = make_rng(0, "index");
  const auto z = enn::sample_index(enn::IndexSpec::epinet(10), rng);
  REQUIRE(std::holds_alternative<Eigen::VectorXd>(z));
  CHECK(std::get<Eigen::VectorXd>(z).size() == 10);
  CHECK(std::get<Eigen::VectorXd>(z).allFinite());
}

TEST_CASE("sample_index: a single particle is always chosen") {
  auto rng = make_rng(0, "index");
  for (int i = 0; i < 100; ++i)
    CHECK(std::get<enn::ParticleIndex>(enn::sample_index(enn::IndexSpec::ensemble(1), rng)).id == 0);
  CHECK_THROWS_AS(enn::sample_index(enn::IndexSpec::ensemble(0), rng), ConfigError);
}

TEST_CASE("index digests are stable and distinguish indices") {
  const enn::EpistemicIndex a = Eigen::VectorXd::Constant(3, 0.5);
  const enn::EpistemicIndex b = Eigen::VectorXd::Constant(3, -0.5);
  CHECK(enn::index_digest(a) == enn::index_digest(enn::EpistemicIndex(Eigen::VectorXd::Constant(3, 0.5))));
  CHECK(enn::index_digest(a) != enn::index_digest(b));
  CHECK(enn::index_digest(enn::ParticleIndex{3}) != enn::index_digest(enn::ParticleIndex{4}));
  CHECK(enn::indices_equal(enn::ParticleIndex{2}, enn::ParticleIndex{2}));
  CHECK_FALSE(enn::indices_equal(a, enn::ParticleIndex{0}));
}

TEST_CASE("epinet with a zero index equals its base network exactly") {
  auto rng = make_rng(1, "epinet-zero");
  const auto e = small_epinet(rng);
  const Eigen::MatrixXd x = normal_matrix(4, 50, rng);
  const Eigen::MatrixXd values = e.forward(x, Eigen::MatrixXd::Zero(3, 1));
  const Eigen::MatrixXd base = nn::forward(e.base(), x);
  for (Eigen::Index b = 0; b < x.cols(); ++b) CHECK(values(b, 0) == base(0, b));
}

TEST_CASE("epinet forward matches the explicit head formula") {
  auto rng = make_rng(2, "epinet-forward");
  const auto e = small_epinet(rng);
  const Eigen::MatrixXd x = normal_matrix(4, 5, rng);
  const Eigen::MatrixXd z = normal_matrix(3, 7, rng);
  const Eigen::MatrixXd values = e.forward(x, z);
  nn::ForwardCache cache;
  const Eigen::MatrixXd f = nn::forward(e.base(), x, &cache);
  for (Eigen::Index b = 0; b < 5; ++b)
    for (Eigen::Index k = 0; k < 7; ++k) {
      const auto rep = cache.representation().col(b);
      const Eigen::VectorXd g = head_out(e.head(), rep, z.col(k)) + 0.3 * head_out(e.prior_head(), rep, z.col(k));
      CHECK(values(b, k) == doctest::Approx(f(0, b) + g.dot(z.col(k))).epsilon(1e-12));
    }
  CHECK(enn::enn_forward(e, x.col(0), enn::EpistemicIndex(Eigen::VectorXd(z.col(0)))) ==
        doctest::Approx(values(0, 0)).epsilon(1e-12));
}

TEST_CASE("ensemble with zero prior scale is its base network") {
  auto rng = make_rng(3, "ensemble");
  const std::vector<std::size_t> sizes{4, 8, 1};
  const auto ens = EnsembleNet::create(sizes, 5, 0.0, rng);
  const Eigen::MatrixXd x = normal_matrix(4, 10, rng);
  for (std::size_t m = 0; m < 5; ++m)
    CHECK(ens.forward(x, m) == nn::forward(ens.base(m), x).row(0).transpose());
}

TEST_CASE("ensemble with a zero base network outputs 0.3 times its prior") {
  auto rng = make_rng(4, "ensemble");
  const std::vector<std::size_t> sizes{4, 8, 1};
  auto ens = EnsembleNet::create(sizes, 3, enn::kDefaultPriorScale, rng);
  for (auto& net : ens.trainable())
    for (auto& l : net.mutable_layers()) {
      l.weight.setZero();
      l.bias.setZero();
    }
  const Eigen::MatrixXd x = normal_matrix(4, 10, rng);
  for (std::size_t m = 0; m < 3; ++m)
    CHECK(ens.forward(x, m) == (0.3 * nn::forward(ens.prior(m), x).row(0)).transpose());
}

TEST_CASE("ensemble of identical particles is index independent") {
  auto rng = make_rng(5, "ensemble");
  const std::vector<std::size_t> sizes{3, 6, 1};
  const auto base = nn::glorot_init(sizes, rng);
  const auto prior = nn::glorot_init(sizes, rng);
  const EnsembleNet ens(std::vector<nn::DenseNet>(4, base), std::vector<nn::DenseNet>(4, prior), 0.3);
  const Eigen::MatrixXd x = normal_matrix(3, 20, rng);
  for (std::size_t m = 1; m < 4; ++m) CHECK(ens.forward(x, m) == ens.forward(x, 0));
}

TEST_CASE("prior scale outside [0, 1) is rejected") {
  auto rng = make_rng(0, "ensemble");
  const std::vector<std::size_t> sizes{3, 4, 1}, head{4};
  CHECK_THROWS_AS(EnsembleNet::create(sizes, 2, 1.0, rng), ConfigError);
  CHECK_THROWS_AS(EnsembleNet::create(sizes, 2, -0.1, rng), ConfigError);
  CHECK_THROWS_AS(EpiNet::create(sizes, head, 3, 1.5, rng), ConfigError);
}

TEST_CASE("index kind mismatch is a usage error") {
  auto rng = make_rng(0, "mismatch");
  const std::vector<std::size_t> sizes{4, 5, 1};
  const enn::EnnParams ens = EnsembleNet::create(sizes, 2, 0.3, rng);
  const enn::EnnParams epi = small_epinet(rng);
  const Eigen::VectorXd x = Eigen::VectorXd::Zero(4);
  CHECK_THROWS_AS(enn::enn_forward(ens, x, Eigen::VectorXd::Zero(3)), UsageError);
  CHECK_THROWS_AS(enn::enn_forward(epi, x, enn::ParticleIndex{0}), UsageError);
  CHECK_THROWS_AS(enn::enn_forward(ens, x, enn::ParticleIndex{2}), UsageError);
}

TEST_CASE("enn_grad covers trainable networks only") {
  auto rng = make_rng(6, "grad-layout");
  const std::vector<std::size_t> sizes{4, 5, 1};
  const enn::EnnParams ens = EnsembleNet::create(sizes, 5, 0.3, rng);
  const Eigen::VectorXd x = normal_matrix(4, 1, rng).col(0);

  SUBCASE("ensemble particle 3: every other particle gets zero") {
    const auto g = enn::enn_grad(ens, x, enn::ParticleIndex{3}, 1.0);
    REQUIRE(g.size() == 5);
    for (std::size_t m = 0; m < 5; ++m) {
      if (m == 3) {
        CHECK(g[m].max_abs() > 0.0);
      } else {
        CHECK(g[m].max_abs() == 0.0);
      }
    }
  }
  SUBCASE("epinet: base and learnable head") {
    const enn::EnnParams epi = small_epinet(rng);
    const auto g = enn::enn_grad(epi, x, Eigen::VectorXd(normal_matrix(3, 1, rng).col(0)), 1.0);
    REQUIRE(g.size() == 2);
    const auto nets = enn::trainable_nets(epi);
    CHECK(g[0].congruent_with(*nets[0]));
    CHECK(g[1].congruent_with(*nets[1]));
  }
}

TEST_CASE("ensemble squared-loss gradient matches finite differences") {
  auto rng = make_rng(7, "fd-ensemble");
  const std::vector<std::size_t> sizes{4, 6, 5, 1};
  double worst = 0.0;
  int accepted = 0;
  while (accepted < 100) {
    auto ens = EnsembleNet::create(sizes, 4, 0.3, rng);
    for (auto& net : ens.trainable()) randomize_biases(net, rng);
    const std::size_t m = static_cast<std::size_t>(accepted % 4);
    const Eigen::MatrixXd x = normal_matrix(4, 3, rng);
    const Eigen::VectorXd y = normal_matrix(3, 1, rng).col(0);

    nn::ForwardCache base_cache, prior_cache;
    nn::forward(ens.base(m), x, &base_cache);
    nn::forward(ens.prior(m), x, &prior_cache);
    if (std::min(testing::min_hidden_preactivation(base_cache), testing::min_hidden_preactivation(prior_cache)) <
        testing::kKinkMargin)
      continue;
    ++accepted;

    const Eigen::VectorXd residual = ens.forward(x, m) - y;
    const auto analytic = testing::flatten(ens.particle_gradient(x, m, 2.0 * residual));
    const auto numeric =
        testing::numeric_gradient(ens.trainable()[m], [&] { return (ens.forward(x, m) - y).squaredNorm(); });
    worst = std::max(worst, testing::relative_error(analytic, numeric));
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("epinet stop-gradient loss gradient matches finite differences") {
  auto rng = make_rng(8, "fd-epinet");
  double worst_base = 0.0, worst_head = 0.0, min_sg_gap = std::numeric_limits<double>::infinity();
  int accepted = 0;
  while (accepted < 100) {
    auto e = small_epinet(rng);
    const Eigen::MatrixXd x = normal_matrix(4, 3, rng);
    const Eigen::MatrixXd z = normal_matrix(3, 4, rng);
    const Eigen::MatrixXd y = normal_matrix(3, 4, rng);
    if (epinet_near_kink(e, x, z)) continue;
    ++accepted;

    const auto pass = e.run(x, z);
    const auto grad = e.gradient(pass, 2.0 * (pass.values - y));
    const nn::DenseNet frozen = e.base();

    const auto base_sg = testing::numeric_gradient(e.mutable_base(), [&] { return epinet_loss(e, &frozen, x, z, y); });
    const auto head_sg = testing::numeric_gradient(e.mutable_head(), [&] { return epinet_loss(e, &frozen, x, z, y); });
    worst_base = std::max(worst_base, testing::relative_error(testing::flatten(grad.base), base_sg));
    worst_head = std::max(worst_head, testing::relative_error(testing::flatten(grad.head), head_sg));

    // Without the stop-gradient the trunk would also see the head path.
    const auto base_full = testing::numeric_gradient(e.mutable_base(), [&] { return epinet_loss(e, nullptr, x, z, y); });
    min_sg_gap = std::min(min_sg_gap, testing::relative_error(testing::flatten(grad.base), base_full));
  }
  CHECK(worst_base <= 1e-4);
  CHECK(worst_head <= 1e-4);
  CHECK(min_sg_gap > 1e-3);
}

TEST_CASE("priors stay bit-identical under training") {
  auto rng = make_rng(9, "prior-freeze");
  const std::vector<std::size_t> sizes{4, 5, 1};
  enn::EnnParams ens = EnsembleNet::create(sizes, 3, 0.3, rng);
  enn::EnnParams epi = small_epinet(rng);
  for (auto* params : {&ens, &epi}) {
    const auto prior_before = enn::prior_checksum(*params);
    const auto trainable_before = enn::trainable_checksum(*params);
    auto opts = enn::make_optimizers(*params, nn::OptimizerConfig{});
    const enn::EpistemicIndex z = std::holds_alternative<EnsembleNet>(*params)
                                      ? enn::EpistemicIndex(enn::ParticleIndex{1})
                                      : enn::EpistemicIndex(Eigen::VectorXd(normal_matrix(3, 1, rng).col(0)));
    for (int step = 0; step < 200; ++step) {
      const Eigen::VectorXd x = normal_matrix(4, 1, rng).col(0);
      const auto grads = enn::enn_grad(*params, x, z, 2.0 * enn::enn_forward(*params, x, z));
      auto nets = enn::trainable_nets(*params);
      for (std::size_t i = 0; i < nets.size(); ++i) opts[i].step(*nets[i], grads[i]);
    }
    CHECK(enn::trainable_checksum(*params) != trainable_before);
    CHECK(enn::prior_checksum(*params) == prior_before);
    CHECK(enn::priors_intact(*params));
  }
}

TEST_CASE("running mean over sampled indices has variance shrinking as 1/n") {
  auto rng = make_rng(10, "marginal");
  const auto e = small_epinet(rng);
  const Eigen::VectorXd x = normal_matrix(4, 1, rng).col(0);
  const Eigen::MatrixXd z = enn::sample_index_batch(3, 10000, rng);
  const Eigen::RowVectorXd v = e.forward(Eigen::MatrixXd(x), z).row(0);
  const auto group_mean_variance = [&](Eigen::Index size) {
    const Eigen::Index groups = v.size() / size;
    Eigen::VectorXd means(groups);
    for (Eigen::Index g = 0; g < groups; ++g) means[g] = v.segment(g * size, size).mean();
    return (means.array() - means.mean()).square().sum() / static_cast<double>(groups - 1);
  };
  const double ratio = group_mean_variance(10) / group_mean_variance(100);
  CHECK(ratio > 5.0);
  CHECK(ratio < 20.0);
}

TEST_CASE("checkpoints round-trip every model kind") {
  auto rng = make_rng(11, "checkpoint");
  const std::vector<std::size_t> sizes{4, 5, 1};
  const std::vector<enn::ModelParams> models = {nn::glorot_init(sizes, rng), EnsembleNet::create(sizes, 3, 0.3, rng),
                                                small_epinet(rng)};
  for (const auto& model : models) {
    enn::Checkpoint ck{model, {{"agent", "x"}, {"training_users", {0, 1}}}};
    const auto bytes = enn::serialize(ck);
    const auto back = enn::deserialize(bytes);
    CHECK(back.model.index() == model.index());
    CHECK(enn::model_checksum(back.model) == enn::model_checksum(model));
    CHECK(back.metadata == ck.metadata);
    CHECK(enn::serialize(back) == bytes);
  }
}

TEST_CASE("malformed checkpoints are validation errors") {
  auto rng = make_rng(12, "checkpoint");
  const std::vector<std::size_t> sizes{4, 5, 1};
  const auto bytes = enn::serialize(enn::Checkpoint{nn::glorot_init(sizes, rng), {}});

  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(enn::deserialize(bad_magic), ValidationError);

  auto bad_version = bytes;
  bad_version[8] = 99;
  CHECK_THROWS_AS(enn::deserialize(bad_version), ValidationError);

  auto truncated = bytes;
  truncated.resize(bytes.size() - 3);
  CHECK_THROWS_AS(enn::deserialize(truncated), ValidationError);

  auto trailing = bytes;
  trailing.push_back(0);
  CHECK_THROWS_AS(enn::deserialize(trailing), ValidationError);

  CHECK_THROWS_AS(enn::deserialize({}), ValidationError);
}
