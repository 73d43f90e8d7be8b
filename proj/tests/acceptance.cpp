// Acceptance suite: one PASS/FAIL line per criterion, artifacts under --out.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "deepex/agents/agent.hpp"
#include "deepex/agents/selection.hpp"
#include "deepex/agents/td.hpp"
#include "deepex/casestudy/tabular.hpp"
#include "deepex/enn/enn.hpp"
#include "deepex/harness/config.hpp"
#include "deepex/harness/experiment.hpp"
#include "deepex/harness/metrics.hpp"
#include "epinet_oracle.hpp"
#include "fd_oracle.hpp"

namespace {

using namespace deepex;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

// Bands.
constexpr double kBaselineMax = 0.05;
constexpr double kDeMin = 0.40;
constexpr double kEpinetSlack = 0.10;
constexpr double kToyBudgetSeconds = 30 * 60;
constexpr double kOracleBudgetSeconds = 60;
constexpr double kGeometricMean = 16.0;
constexpr double kGeometricTolerance = 0.10;
constexpr double kDeLow = 1.9, kDeHigh = 2.1;
constexpr std::size_t kSampleComplexityTrials = 10000;
constexpr std::size_t kUcbLifecycles = 1000;
constexpr std::size_t kUsers = 20, kRounds = 10;
constexpr int kMultiUserHorizon = 10;
constexpr double kMultiUserDeMin = 0.9 * kUsers * (kRounds - 1);
constexpr double kMultiUserRandomMax = 1.0;
constexpr std::size_t kMultiUserTrials = 1000;
constexpr double kFdMaxError = 1e-4;
constexpr int kFdInstances = 100;
constexpr std::size_t kPriorTrainingSteps = 1000;
constexpr double kSigma = 0.1;
constexpr std::size_t kNoiseDraws = 100000;
constexpr double kNoiseTolerance = 0.05;
constexpr double kStandInGap = 0.2;

struct Outcome {
  std::string id;
  std::string title;
  bool pass = false;
  std::vector<std::string> details;
};

std::string fixed(double x, int digits = 4) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << x;
  return s.str();
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void report(const Outcome& o) {
  std::cout << (o.pass ? "PASS " : "FAIL ") << o.id << "  " << o.title << '\n';
  for (const auto& d : o.details) std::cout << "       " << d << '\n';
  std::cout.flush();
}

double mean_of(const harness::MetricsTable& t, const std::string& agent) {
  const auto* m = t.find(agent);
  if (!m) throw std::runtime_error("no metrics for agent " + agent);
  return m->mean();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Per user, the index digest may change only at a life-cycle boundary or on
/// the user's first decision.
std::size_t commitment_breaks(const harness::SeedRun& run) {
  std::map<std::size_t, std::string> current;
  std::size_t breaks = 0;
  for (const auto& d : run.decisions) {
    if (d.index_digest.empty()) continue;
    auto it = current.find(d.user);
    if (it != current.end() && !d.boundary && it->second != d.index_digest) ++breaks;
    current[d.user] = d.index_digest;
  }
  return breaks;
}

// ---------------------------------------------------------------- 1

Outcome toy_table(const harness::ExperimentResult& result, double elapsed) {
  Outcome o{"1", "toy life-cycle reward bands (10 seeds x 100 life-cycles)", true, {}};
  const auto& t = result.metrics;
  for (const char* label : {"epsilon-greedy", "neural-ts", "neural-ucb", "neural-linucb"}) {
    const double m = mean_of(t, label);
    const bool ok = m <= kBaselineMax;
    o.pass = o.pass && ok;
    o.details.push_back(std::string(label) + " " + fixed(m) + " +- " + fixed(t.find(label)->std_err()) +
                        (ok ? " <= " : " > ") + fixed(kBaselineMax, 2));
  }
  const double ens = mean_of(t, "ensemble-de");
  const double epi = mean_of(t, "epinet-de");
  for (const auto& [label, m] : {std::pair<std::string, double>{"ensemble-de", ens}, {"epinet-de", epi}}) {
    const bool ok = m >= kDeMin;
    o.pass = o.pass && ok;
    o.details.push_back(label + " " + fixed(m) + " +- " + fixed(t.find(label)->std_err()) + (ok ? " >= " : " < ") +
                        fixed(kDeMin, 2));
  }
  const bool order = epi >= ens - kEpinetSlack;
  o.pass = o.pass && order;
  o.details.push_back(std::string("epinet-de >= ensemble-de - 0.10: ") + (order ? "yes" : "no"));
  std::size_t failed = 0;
  for (const auto& r : result.runs) failed += !r.ok;
  o.pass = o.pass && failed == 0 && elapsed < kToyBudgetSeconds;
  o.details.push_back("failed runs " + std::to_string(failed) + ", runtime " + fixed(elapsed, 1) + " s (budget " +
                      fixed(kToyBudgetSeconds, 0) + " s)");
  return o;
}

// ---------------------------------------------------------------- 2

Outcome sample_complexity() {
  Outcome o{"2", "single-user sample complexity at T=4", true, {}};
  const auto start = Clock::now();
  auto rng = make_rng(0, "acceptance/sample-complexity");
  const auto near16 = [](double m) { return std::abs(m - kGeometricMean) <= kGeometricTolerance * kGeometricMean; };

  const auto random = casestudy::random_lifecycles_to_success(4, kSampleComplexityTrials, rng);
  const auto ts = casestudy::ts_lifecycles_to_success(4, kSampleComplexityTrials, rng);
  const auto de =
      casestudy::de_lifecycles_to_success(kSampleComplexityTrials, rng, casestudy::PosteriorUpdate::kRewardOnly);
  const auto ucb = casestudy::ucb_run(4, kUcbLifecycles);

  const bool random_ok = near16(random.mean), ts_ok = near16(ts.mean);
  const bool de_ok = de.mean >= kDeLow && de.mean <= kDeHigh;
  const bool ucb_ok = ucb.cumulative_reward == 0.0 && ucb.alternation_violations == 0;
  const double elapsed = seconds_since(start);
  o.pass = random_ok && ts_ok && de_ok && ucb_ok && elapsed < kOracleBudgetSeconds;
  o.details.push_back("random " + fixed(random.mean, 3) + " life-cycles (16 +- 10%)");
  o.details.push_back("thompson " + fixed(ts.mean, 3) + " life-cycles (16 +- 10%)");
  o.details.push_back("deep exploration " + fixed(de.mean, 3) + " life-cycles ([1.9, 2.1])");
  o.details.push_back("ucb reward " + fixed(ucb.cumulative_reward, 0) + " over " + std::to_string(kUcbLifecycles) +
                      " life-cycles, alternation violations " + std::to_string(ucb.alternation_violations));
  o.details.push_back("runtime " + fixed(elapsed, 2) + " s");
  return o;
}

// ---------------------------------------------------------------- 3

Outcome multi_user_oracle() {
  Outcome o{"3", "multi-user cumulative reward at N=20, M=10, T=10", true, {}};
  const auto start = Clock::now();
  auto rng = make_rng(0, "acceptance/multiuser");
  double de = 0.0, random = 0.0;
  for (std::size_t i = 0; i < kMultiUserTrials; ++i) {
    de += casestudy::multiuser_de_sweep(kUsers, kRounds, kMultiUserHorizon, rng).cumulative_reward;
    random += casestudy::multiuser_random_sweep(kUsers, kRounds, kMultiUserHorizon, rng).cumulative_reward;
  }
  de /= kMultiUserTrials;
  random /= kMultiUserTrials;
  const double elapsed = seconds_since(start);
  o.pass = de >= kMultiUserDeMin && random <= kMultiUserRandomMax && elapsed < kOracleBudgetSeconds;
  o.details.push_back("deep exploration with generalizer " + fixed(de, 2) + " (>= " + fixed(kMultiUserDeMin, 0) + ")");
  o.details.push_back("random " + fixed(random, 3) + " (<= " + fixed(kMultiUserRandomMax, 1) + ")");
  o.details.push_back("runtime " + fixed(elapsed, 2) + " s");
  return o;
}

// ---------------------------------------------------------------- 4a

Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal;
  return Eigen::MatrixXd::NullaryExpr(rows, cols, [&] { return normal(rng); });
}

void jitter_biases(nn::DenseNet& net, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 0.1);
  for (auto& l : net.mutable_layers())
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias[i] = normal(rng);
}

bool kinked(const nn::DenseNet& net, const Eigen::MatrixXd& x) {
  nn::ForwardCache c;
  nn::forward(net, x, &c);
  return testing::min_hidden_preactivation(c) < testing::kKinkMargin;
}

const agents::FeatureTable& one_hot_actions() {
  static const agents::FeatureTable table({Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1), Eigen::Vector2d(0, 0)});
  return table;
}

std::vector<agents::Transition> random_transitions(Rng& rng, std::size_t n) {
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> arm(0, 1);
  std::vector<agents::Transition> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& t = out[i];
    t.user_features = normal_matrix(3, 1, rng).col(0);
    t.action = arm(rng);
    t.action_features = one_hot_actions()[t.action];
    t.interact = normal_matrix(4, 1, rng).col(0);
    t.next_interact = normal_matrix(4, 1, rng).col(0);
    t.true_reward = t.reward = normal(rng);
    t.terminal = i % 3 == 2;
    t.next_allowed = t.terminal ? std::vector<int>{envs::kNoop} : std::vector<int>{envs::kA1, envs::kA2};
  }
  return out;
}

agents::TdBatch batch_of(const std::vector<agents::Transition>& ts) {
  std::vector<const agents::Transition*> ptrs;
  for (const auto& t : ts) ptrs.push_back(&t);
  return agents::make_td_batch(ptrs, one_hot_actions());
}

constexpr std::size_t kTdInput = 3 + 2 + 4;

double fd_plain(Rng& rng) {
  const std::vector<std::size_t> sizes{5, 8, 6, 2};
  double worst = 0.0;
  for (int accepted = 0; accepted < kFdInstances;) {
    auto net = nn::glorot_init(sizes, rng);
    jitter_biases(net, rng);
    const Eigen::MatrixXd x = normal_matrix(5, 4, rng), y = normal_matrix(2, 4, rng);
    nn::ForwardCache cache;
    const Eigen::MatrixXd out = nn::forward(net, x, &cache);
    if (testing::min_hidden_preactivation(cache) < testing::kKinkMargin) continue;
    ++accepted;
    const auto analytic = testing::flatten(nn::backward(net, cache, 2.0 * (out - y)).params);
    const auto numeric = testing::numeric_gradient(net, [&] { return (nn::forward(net, x) - y).squaredNorm(); });
    worst = std::max(worst, testing::relative_error(analytic, numeric));
  }
  return worst;
}

double fd_ensemble(Rng& rng) {
  const std::vector<std::size_t> sizes{4, 6, 5, 1};
  double worst = 0.0;
  for (int accepted = 0; accepted < kFdInstances;) {
    auto ens = enn::EnsembleNet::create(sizes, 3, enn::kDefaultPriorScale, rng);
    for (auto& net : ens.trainable()) jitter_biases(net, rng);
    const std::size_t m = static_cast<std::size_t>(accepted % 3);
    const Eigen::MatrixXd x = normal_matrix(4, 3, rng);
    const Eigen::VectorXd y = normal_matrix(3, 1, rng).col(0);
    if (kinked(ens.base(m), x) || kinked(ens.prior(m), x)) continue;
    ++accepted;
    const auto analytic = testing::flatten(ens.particle_gradient(x, m, 2.0 * (ens.forward(x, m) - y)));
    const auto numeric =
        testing::numeric_gradient(ens.trainable()[m], [&] { return (ens.forward(x, m) - y).squaredNorm(); });
    worst = std::max(worst, testing::relative_error(analytic, numeric));
  }
  return worst;
}

double fd_epinet(Rng& rng) {
  const std::vector<std::size_t> base{4, 5, 1}, head{6};
  double worst = 0.0;
  for (int accepted = 0; accepted < kFdInstances;) {
    auto e = enn::EpiNet::create(base, head, 3, enn::kDefaultPriorScale, rng);
    jitter_biases(e.mutable_base(), rng);
    jitter_biases(e.mutable_head(), rng);
    const Eigen::MatrixXd x = normal_matrix(4, 3, rng), z = normal_matrix(3, 4, rng), y = normal_matrix(3, 4, rng);
    if (testing::epinet_near_kink(e, x, z)) continue;
    ++accepted;
    const auto pass = e.run(x, z);
    const auto grad = e.gradient(pass, 2.0 * (pass.values - y));
    const nn::DenseNet frozen = e.base();
    const auto loss = [&] { return testing::epinet_loss(e, &frozen, x, z, y); };
    worst = std::max(worst, testing::relative_error(testing::flatten(grad.base),
                                                    testing::numeric_gradient(e.mutable_base(), loss)));
    worst = std::max(worst, testing::relative_error(testing::flatten(grad.head),
                                                    testing::numeric_gradient(e.mutable_head(), loss)));
  }
  return worst;
}

double fd_td(Rng& rng) {
  double worst = 0.0;
  const std::vector<std::size_t> sizes{kTdInput, 7, 1}, head{5};
  for (int accepted = 0; accepted < kFdInstances;) {
    auto online = nn::glorot_init(sizes, rng);
    const auto target = nn::glorot_init(sizes, rng);
    const auto ts = random_transitions(rng, 5);
    const auto batch = batch_of(ts);
    if (kinked(online, batch.inputs)) continue;
    ++accepted;
    const auto analytic = testing::flatten(agents::td_gradient(online, target, batch));
    const auto numeric = testing::numeric_gradient(online, [&] { return agents::td_loss(online, target, batch); });
    worst = std::max(worst, testing::relative_error(analytic, numeric));
  }
  for (int accepted = 0; accepted < kFdInstances;) {
    auto online = enn::EpiNet::create(sizes, head, 3, enn::kDefaultPriorScale, rng);
    const auto target = enn::EpiNet::create(sizes, head, 3, enn::kDefaultPriorScale, rng);
    const auto ts = random_transitions(rng, 4);
    const auto batch = batch_of(ts);
    const Eigen::MatrixXd z = enn::sample_index_batch(3, 5, rng);
    if (testing::epinet_near_kink(online, batch.inputs, z)) continue;
    ++accepted;
    const Eigen::MatrixXd y = agents::td_targets(batch, target.forward(batch.next_inputs, z));
    const auto grads = agents::td_gradient(online, target, batch, z);
    const nn::DenseNet frozen = online.base();
    const auto loss = [&] { return testing::epinet_loss(online, &frozen, batch.inputs, z, y); };
    worst = std::max(worst, testing::relative_error(testing::flatten(grads[0]),
                                                    testing::numeric_gradient(online.mutable_base(), loss)));
    worst = std::max(worst, testing::relative_error(testing::flatten(grads[1]),
                                                    testing::numeric_gradient(online.mutable_head(), loss)));
  }
  return worst;
}

Outcome gradient_checks() {
  Outcome o{"4a", "finite-difference gradient checks (100 instances per path)", true, {}};
  auto rng = make_rng(0, "acceptance/fd");
  const std::pair<const char*, double (*)(Rng&)> paths[] = {
      {"plain network", fd_plain},
      {"ensemble squared loss", fd_ensemble},
      {"epinet loss with stop-gradient", fd_epinet},
      {"TD loss (plain and epinet)", fd_td},
  };
  for (const auto& [name, check] : paths) {
    const double worst = check(rng);
    const bool ok = worst <= kFdMaxError;
    o.pass = o.pass && ok;
    std::ostringstream s;
    s << name << ": max relative error " << worst;
    o.details.push_back(s.str());
  }
  return o;
}

// ---------------------------------------------------------------- 4b

Outcome priors_frozen() {
  Outcome o{"4b", "prior parameters unchanged after 1000 training steps", true, {}};
  auto rng = make_rng(0, "acceptance/priors");
  for (auto kind : {agents::AgentKind::kEnsembleDe, agents::AgentKind::kEpinetDe}) {
    agents::AgentConfig c;
    c.kind = kind;
    c.warmup = 1;
    c.batch_size = 16;
    auto agent = agents::make_agent(c, kTdInput, one_hot_actions(), 1);
    const auto& rvf = dynamic_cast<const agents::RvfAgent&>(*agent);
    const auto prior_before = enn::prior_checksum(rvf.online());
    const auto trainable_before = enn::trainable_checksum(rvf.online());
    const auto data = random_transitions(rng, 64);
    for (std::size_t i = 0; agent->update_count() < kPriorTrainingSteps; ++i) {
      agent->store(data[i % data.size()]);
      agent->end_step();
    }
    const bool ok = enn::prior_checksum(rvf.online()) == prior_before && enn::priors_intact(rvf.online()) &&
                    enn::trainable_checksum(rvf.online()) != trainable_before;
    o.pass = o.pass && ok;
    o.details.push_back(std::string(agents::to_string(kind)) + ": " + std::to_string(agent->update_count()) +
                        " updates, prior checksum " + (ok ? "unchanged" : "CHANGED or trainables idle"));
  }
  return o;
}

// ---------------------------------------------------------------- 4c

Outcome zero_index_identity() {
  Outcome o{"4c", "epinet with z = 0 equals its base network exactly", true, {}};
  auto rng = make_rng(0, "acceptance/zero-index");
  std::size_t mismatches = 0, compared = 0;
  const std::vector<std::size_t> base{kTdInput, 20, 1}, head{16};
  for (int k = 0; k < 100; ++k) {
    auto e = enn::EpiNet::create(base, head, 10, enn::kDefaultPriorScale, rng);
    jitter_biases(e.mutable_head(), rng);
    const Eigen::MatrixXd x = normal_matrix(kTdInput, 32, rng);
    const Eigen::MatrixXd v = e.forward(x, Eigen::MatrixXd::Zero(10, 1));
    const Eigen::MatrixXd f = nn::forward(e.base(), x);
    for (Eigen::Index b = 0; b < x.cols(); ++b, ++compared) mismatches += v(b, 0) != f(0, b);
  }
  o.pass = mismatches == 0;
  o.details.push_back(std::to_string(compared) + " inputs, " + std::to_string(mismatches) + " mismatches");
  return o;
}

// ---------------------------------------------------------------- 4d

Outcome perturbation_noise() {
  Outcome o{"4d", "reward perturbation std within 5% of sigma = 0.1", true, {}};
  auto rng = make_rng(0, "acceptance/noise");
  std::vector<agents::ReplayBuffer> buffer(1, agents::ReplayBuffer(16));
  const auto t = random_transitions(rng, 1).front();
  harness::RunningStats stats;
  for (std::size_t i = 0; i < kNoiseDraws; ++i) stats.add(agents::store_perturbed(buffer, t, kSigma, rng)[0]);
  const double sd = stats.std_dev();
  o.pass = std::abs(sd - kSigma) <= kNoiseTolerance * kSigma;
  o.details.push_back("empirical std " + fixed(sd, 5) + " over " + std::to_string(kNoiseDraws) + " draws");
  return o;
}

// ---------------------------------------------------------------- 4e

Outcome commitment(const std::vector<const harness::ExperimentResult*>& results) {
  Outcome o{"4e", "per-life-cycle index commitment on every logged run", true, {}};
  std::size_t runs = 0, decisions = 0, reported = 0, replayed = 0;
  for (const auto* r : results)
    for (const auto& run : r->runs) {
      if (run.decisions.empty() || run.decisions.front().index_digest.empty()) continue;
      ++runs;
      decisions += run.decisions.size();
      reported += run.commitment_violations;
      replayed += commitment_breaks(run);
    }
  o.pass = runs > 0 && reported == 0 && replayed == 0;
  o.details.push_back(std::to_string(runs) + " deep-exploration runs, " + std::to_string(decisions) +
                      " decisions, violations reported " + std::to_string(reported) + ", replayed from the log " +
                      std::to_string(replayed));
  return o;
}

// ---------------------------------------------------------------- 5

Outcome determinism(const harness::ExperimentConfig& toy, const harness::ExperimentResult& full, const fs::path& out) {
  Outcome o{"5", "repeated runs give byte-identical CSV and SVG artifacts", true, {}};
  auto config = toy;
  config.seeds.resize(2);
  config.save_checkpoints = false;
  const auto a = out / "repeat-a";
  const auto b = out / "repeat-b";
  const auto first = harness::run_experiment(config);
  harness::write_artifacts(first, config, a);
  harness::write_artifacts(harness::run_experiment(config), config, b);

  std::size_t compared = 0, differing = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    const auto ext = e.path().extension();
    if (ext != ".csv" && ext != ".svg") continue;
    ++compared;
    if (slurp(e.path()) != slurp(b / e.path().filename())) {
      ++differing;
      o.details.push_back(e.path().filename().string() + " differs");
    }
  }
  // The same seeds inside the full sweep produce the same life-cycle records.
  std::set<std::uint64_t> seeds(config.seeds.begin(), config.seeds.end());
  std::vector<std::string> from_full, from_repeat;
  const auto key = [](const harness::RunRecord& r) {
    return r.agent + '/' + std::to_string(r.seed) + '/' + std::to_string(r.user) + '/' +
           std::to_string(r.life_cycle) + '/' + fixed(r.reward, 17) + '/' + std::to_string(r.steps);
  };
  for (const auto& r : full.records())
    if (seeds.count(r.seed)) from_full.push_back(key(r));
  for (const auto& r : first.records()) from_repeat.push_back(key(r));
  const bool subset_ok = from_full == from_repeat;
  o.pass = compared >= 4 && differing == 0 && subset_ok;
  o.details.push_back(std::to_string(compared) + " files compared, " + std::to_string(differing) + " differ");
  o.details.push_back(std::string("seeds 0-1 of the full toy sweep reproduce: ") + (subset_ok ? "yes" : "no"));
  return o;
}

// ---------------------------------------------------------------- stand-in

Outcome stand_in(const harness::ExperimentResult& result) {
  Outcome o{"6", "multi-user neural stand-in: epinet-de beats epsilon-greedy by >= 0.2", true, {}};
  const double epi = mean_of(result.metrics, "epinet-de");
  const double eps = mean_of(result.metrics, "epsilon-greedy");
  std::size_t failed = 0;
  for (const auto& r : result.runs) failed += !r.ok;
  o.pass = epi - eps >= kStandInGap && failed == 0;
  o.details.push_back("epinet-de " + fixed(epi) + " +- " + fixed(result.metrics.find("epinet-de")->std_err()) +
                      ", epsilon-greedy " + fixed(eps) + " +- " +
                      fixed(result.metrics.find("epsilon-greedy")->std_err()) + ", gap " + fixed(epi - eps));
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance suite"};
  std::string out = "acceptance_artifacts";
  std::string config_dir = DEEPEX_CONFIG_DIR;
  app.add_option("--out", out, "artifact directory");
  app.add_option("--configs", config_dir, "directory holding the experiment configs");
  CLI11_PARSE(app, argc, argv);

  harness::configure_allocator();
  const fs::path out_dir(out);
  fs::create_directories(out_dir);
  std::vector<Outcome> outcomes;
  const auto record = [&](Outcome o) {
    report(o);
    outcomes.push_back(std::move(o));
  };

  try {
    record(sample_complexity());
    record(multi_user_oracle());
    record(gradient_checks());
    record(priors_frozen());
    record(zero_index_identity());
    record(perturbation_noise());

    const auto toy_config = harness::load_experiment_config(fs::path(config_dir) / "toy_table1.toml");
    const auto toy_start = Clock::now();
    const auto toy = harness::run_experiment(toy_config);
    const double toy_elapsed = seconds_since(toy_start);
    harness::write_artifacts(toy, toy_config, out_dir / "toy");
    record(toy_table(toy, toy_elapsed));

    const auto multi_config = harness::load_experiment_config(fs::path(config_dir) / "multiuser_standin.toml");
    const auto multi = harness::run_experiment(multi_config);
    harness::write_artifacts(multi, multi_config, out_dir / "multiuser");
    record(stand_in(multi));

    record(commitment({&toy, &multi}));
    record(determinism(toy_config, toy, out_dir));
  } catch (const std::exception& e) {
    std::cout << "FAIL -  aborted: " << e.what() << '\n';
    return 1;
  }

  nlohmann::json summary = nlohmann::json::array();
  std::size_t failed = 0;
  for (const auto& o : outcomes) {
    summary.push_back({{"id", o.id}, {"criterion", o.title}, {"pass", o.pass}, {"details", o.details}});
    failed += !o.pass;
  }
  std::ofstream(out_dir / "acceptance.json", std::ios::binary) << summary.dump(2) << '\n';
  std::cout << (failed ? "FAIL " : "PASS ") << "overall  " << outcomes.size() - failed << '/' << outcomes.size()
            << " criteria\n";
  return failed ? 1 : 0;
}
