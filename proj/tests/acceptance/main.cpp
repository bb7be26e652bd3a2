// Acceptance suite: one PASS/FAIL line per primary criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>

#include <fmt/core.h>
#include <spdlog/spdlog.h>

#include "bubblesim/metrics.hpp"
#include "bubblesim/models.hpp"
#include "bubblesim/simulation.hpp"
#include "bubblesim/training.hpp"
#include "planted.hpp"
#include "support.hpp"

using namespace bubblesim;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string name;
  double budget_seconds;
  std::function<Verdict()> check;
};

const std::vector<std::uint64_t> kSeeds = {1, 2, 3, 4, 5};

// Runs audited by the log-audit criterion, collected from every other check.
struct AuditLedger {
  std::size_t runs = 0;
  std::vector<std::string> problems;

  void add(const RunLog& log) {
    std::vector<std::string> ids;
    for (const auto& p : log.profiles) ids.push_back(p.user_id);
    ++runs;
    for (auto& p : audit_run(log.records, log.slates, ids, log.config.items_per_iteration,
                             log.config.n_iterations)) {
      problems.push_back(std::move(p));
    }
  }
} audits;

RunLog audited_run(const SimulationConfig& config) {
  RunLog log = run(config, testing::fixture_catalog());
  audits.add(log);
  return log;
}

TrainSample sample(std::size_t u, std::size_t i, double y, double w) {
  TrainSample s;
  s.user = u;
  s.item = i;
  s.label = y;
  s.weight = w;
  return s;
}

std::vector<TrainSample> grid_samples() {
  std::vector<TrainSample> s;
  const double labels[3][3] = {{1, 0, 1}, {0, 1, 0}, {1, 1, 0}};
  const double weights[3][3] = {{1, 2, 3}, {2, 1, 1}, {4, 1, 2}};
  for (std::size_t u = 0; u < 3; ++u) {
    for (std::size_t i = 0; i < 3; ++i) s.push_back(sample(u, i, labels[u][i], weights[u][i]));
  }
  return s;
}

double max_fd_error(const std::function<double()>& loss,
                    const std::vector<std::pair<double*, double>>& params) {
  const double h = 1e-5;
  double worst = 0.0;
  for (const auto& [p, analytic] : params) {
    const double saved = *p;
    *p = saved + h;
    const double up = loss();
    *p = saved - h;
    const double down = loss();
    *p = saved;
    const double numeric = (up - down) / (2 * h);
    const double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-8});
    worst = std::max(worst, std::abs(numeric - analytic) / denom);
  }
  return worst;
}

Verdict gradient_correctness() {
  const auto samples = grid_samples();

  MfModel mf = MfModel::random(3, 3, 4, 0.5, 21);
  mf.global_bias = 0.1;
  const auto [mf_loss, mg] = mf_loss_gradient(mf, samples);
  (void)mf_loss;
  std::vector<std::pair<double*, double>> mp = {{&mf.global_bias, mg.global_bias}};
  for (std::size_t k = 0; k < 3; ++k) {
    mp.push_back({&mf.user_bias[k], mg.user_bias[k]});
    mp.push_back({&mf.item_bias[k], mg.item_bias[k]});
  }
  for (std::size_t k = 0; k < mf.user_factors.size(); ++k) {
    mp.push_back({&mf.user_factors[k], mg.user_factors[k]});
    mp.push_back({&mf.item_factors[k], mg.item_factors[k]});
  }
  const double mf_err = max_fd_error(
      [&] {
        std::vector<double> p;
        for (const auto& s : samples) p.push_back(predict_mf(mf, s.user, s.item));
        return weighted_bce(p, samples);
      },
      mp);

  // Users 0-2, items 3-5, one shared context feature per pair.
  FmModel fm = FmModel::random(9, 4, 0.5, 22);
  Rng rng(5);
  for (auto& w : fm.linear) w = rng.normal(0, 0.3);
  auto fm_samples = samples;
  for (auto& s : fm_samples) {
    s.features = {static_cast<FeatureIndex>(s.user), static_cast<FeatureIndex>(3 + s.item),
                  static_cast<FeatureIndex>(6 + (s.user + s.item) % 3)};
  }
  const auto [fm_loss, fg] = fm_loss_gradient(fm, fm_samples);
  (void)fm_loss;
  std::vector<std::pair<double*, double>> fp = {{&fm.bias, fg.bias}};
  for (std::size_t k = 0; k < fm.linear.size(); ++k) fp.push_back({&fm.linear[k], fg.linear[k]});
  for (std::size_t k = 0; k < fm.factors.size(); ++k) {
    fp.push_back({&fm.factors[k], fg.factors[k]});
  }
  const double fm_err = max_fd_error(
      [&] {
        std::vector<double> p;
        for (const auto& s : fm_samples) p.push_back(predict_fm(fm, s.features));
        return weighted_bce(p, fm_samples);
      },
      fp);

  return {mf_err <= 1e-4 && fm_err <= 1e-4,
          fmt::format("max relative error MF {:.2e}, FM {:.2e} (limit 1e-4)", mf_err, fm_err)};
}

Verdict fm_mf_reduction() {
  const std::size_t nu = 5, ni = 7, d = 4;
  double worst = 0.0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    MfModel m = MfModel::random(nu, ni, d, 0.5, 1000 + trial);
    Rng rng(trial);
    m.global_bias = rng.normal(0, 1);
    for (auto& b : m.user_bias) b = rng.normal(0, 1);
    for (auto& b : m.item_bias) b = rng.normal(0, 1);
    FmModel fm = FmModel::zeros(nu + ni, d);
    fm.bias = m.global_bias;
    for (std::size_t u = 0; u < nu; ++u) {
      fm.linear[u] = m.user_bias[u];
      std::copy_n(m.user_vec(u).begin(), d, fm.factor(u).begin());
    }
    for (std::size_t i = 0; i < ni; ++i) {
      fm.linear[nu + i] = m.item_bias[i];
      std::copy_n(m.item_vec(i).begin(), d, fm.factor(nu + i).begin());
    }
    for (std::size_t u = 0; u < nu; ++u) {
      for (std::size_t i = 0; i < ni; ++i) {
        const std::vector<FeatureIndex> active = {static_cast<FeatureIndex>(u),
                                                  static_cast<FeatureIndex>(nu + i)};
        worst = std::max(worst, std::abs(predict_fm(fm, active) - predict_mf(m, u, i)));
      }
    }
  }
  return {worst <= 1e-12, fmt::format("100 parameter sets, max |fm - mf| = {:.2e}", worst)};
}

Verdict weighted_bce_reduction() {
  Rng rng(12);
  std::vector<double> p;
  std::vector<TrainSample> s;
  double plain = 0.0;
  for (int k = 0; k < 64; ++k) {
    const double pk = rng.uniform(0.01, 0.99);
    const double y = rng.bernoulli(0.5) ? 1.0 : 0.0;
    p.push_back(pk);
    s.push_back(sample(0, 0, y, 1.0));
    plain -= y * std::log(pk) + (1 - y) * std::log(1 - pk);
  }
  plain /= 64.0;
  const double unit_gap = std::abs(weighted_bce(p, s) - plain);

  // {(y=1, p=0.8, w=2), (y=0, p=0.3, w=1)}; scripts/oracles.py prints 0.4014810233.
  const double oracle = 0.4014810233;
  const double got = weighted_bce(std::vector<double>{0.8, 0.3},
                                  std::vector<TrainSample>{sample(0, 0, 1, 2), sample(0, 1, 0, 1)});
  const double hand_gap = std::abs(got - oracle);
  return {unit_gap <= 1e-12 && hand_gap <= 1e-5,
          fmt::format("unit weights gap {:.1e}; batch example {:.7f} vs oracle {:.7f} "
                      "(printed literal 0.40145 is {:.1e} away from -1/2[2 ln 0.8 + ln 0.7])",
                      unit_gap, got, oracle, std::abs(0.40145 - oracle))};
}

Verdict metric_oracles() {
  const double uniform_gap =
      std::abs(entropy({{"a", 1}, {"b", 1}, {"c", 1}, {"d", 1}}) - std::log(4.0));
  // scripts/oracles.py prints 0.5623351446.
  const double skew_gap = std::abs(entropy({{"a", 3}, {"b", 1}}) - 0.5623351446);

  Rng rng(31);
  double worst_bubble = 0.0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<std::size_t> counts(1 + rng.uniform_index(40));
    for (auto& c : counts) c = rng.uniform_index(8);
    worst_bubble = std::max(worst_bubble, bubble_proportion(bubble_status(counts)));
  }

  int ecdf_mismatch = 0;
  for (int t = 0; t < 100; ++t) {
    std::vector<double> values;
    std::vector<std::string> groups;
    std::map<std::string, std::vector<double>> by_group;
    const std::size_t n = 2 + rng.uniform_index(50);
    for (std::size_t i = 0; i < n; ++i) {
      const double v = static_cast<double>(rng.uniform_index(12)) / 5.0;
      const std::string g = rng.bernoulli(0.5) ? "g1" : "g2";
      values.push_back(v);
      groups.push_back(g);
      by_group[g].push_back(v);
    }
    const auto got = demographic_ecdf(values, groups);
    for (auto& [g, vals] : by_group) {
      std::sort(vals.begin(), vals.end());
      std::vector<EcdfPoint> expected;
      for (std::size_t r = 0; r < vals.size(); ++r) {
        if (r + 1 < vals.size() && vals[r + 1] == vals[r]) continue;
        expected.push_back({vals[r], static_cast<double>(r + 1) / vals.size()});
      }
      if (!got.contains(g) || got.at(g) != expected) ++ecdf_mismatch;
    }
  }
  const bool ok = uniform_gap <= 1e-12 && skew_gap <= 1e-4 && worst_bubble <= 0.5 &&
                  ecdf_mismatch == 0;
  return {ok, fmt::format("ln4 gap {:.1e}, {{3,1}} gap {:.1e}, max bubble proportion {:.3f} "
                          "over 1000 vectors, ECDF mismatches {}/100 fixtures",
                          uniform_gap, skew_gap, worst_bubble, ecdf_mismatch)};
}

Verdict determinism() {
  testing::TempDir dir;
  const SimulationConfig config;  // 20 users, 5 items, 20 iterations, rule agent
  write_run_dir(audited_run(config), dir / "a");
  write_run_dir(audited_run(config), dir / "b");
  const bool records = testing::read_file(dir / "a" / "records.jsonl") ==
                       testing::read_file(dir / "b" / "records.jsonl");
  const bool metrics = testing::read_file(dir / "a" / "metrics.csv") ==
                       testing::read_file(dir / "b" / "metrics.csv");
  load_run_dir(dir / "a");  // audits the persisted records.jsonl
  return {records && metrics, fmt::format("records.jsonl identical: {}, metrics.csv identical: {}",
                                          records, metrics)};
}

Verdict synthetic_recovery() {
  const double auc = testing::planted_block_auc(1, 50);
  return {auc >= 0.9, fmt::format("held-out AUC {:.4f} after 50 epochs (need >= 0.9)", auc)};
}

Verdict bubble_emergence() {
  int lower = 0, lower_from_cold_start = 0;
  std::string trace;
  for (const auto seed : kSeeds) {
    SimulationConfig config;
    config.seed = seed;
    const RunLog log = audited_run(config);
    const double h1 = log.metrics[1].mean_entropy[0];
    const double h5 = log.metrics[5].mean_entropy[0];
    lower += h5 < h1;
    lower_from_cold_start += log.metrics[4].mean_entropy[0] < log.metrics[0].mean_entropy[0];
    trace += fmt::format(" {}:{:.3f}->{:.3f}", seed, h1, h5);
  }
  return {lower >= 4,
          fmt::format("H_l1[5] < H_l1[1] in {}/5 seeds (need 4);{}; counting the cold-start "
                      "iteration as the first, H_l1[4] < H_l1[0] in {}/5",
                      lower, trace, lower_from_cold_start)};
}

double final_entropy(SimulationConfig config, std::uint64_t seed) {
  config.seed = seed;
  return audited_run(config).metrics.back().mean_entropy[0];
}

Verdict intervention_direction() {
  SimulationConfig progressive, reversed, cold0, cold50;
  progressive.weight_strategy = WeightStrategy::kProgressive;
  reversed.weight_strategy = WeightStrategy::kReversed;
  cold0.cscmr = 0;
  cold50.cscmr = 50;
  int strategy_wins = 0, cscmr_wins = 0;
  for (const auto seed : kSeeds) {
    strategy_wins += final_entropy(progressive, seed) > final_entropy(reversed, seed);
    cscmr_wins += final_entropy(cold0, seed) >= final_entropy(cold50, seed);
  }
  // Wider context, not part of the verdict.
  int wide_strategy = 0, wide_cscmr = 0;
  const int wide = 40;
  for (std::uint64_t seed = 1; seed <= wide; ++seed) {
    wide_strategy += final_entropy(progressive, seed) > final_entropy(reversed, seed);
    wide_cscmr += final_entropy(cold0, seed) >= final_entropy(cold50, seed);
  }
  return {strategy_wins >= 4 && cscmr_wins >= 3,
          fmt::format("progressive > reversed in {}/5 seeds (need 4); cscmr 0 >= 50 in {}/5 "
                      "(need 3); over seeds 1-{}: {}/{} and {}/{}",
                      strategy_wins, cscmr_wins, wide, wide_strategy, wide, wide_cscmr, wide)};
}

Verdict log_audit() {
  const std::size_t extra_before = audits.runs;
  for (const auto backend_seed : {11u, 12u}) {
    for (const auto kind : {ModelKind::kMf, ModelKind::kFm}) {
      SimulationConfig config;
      config.seed = backend_seed;
      config.model_kind = kind;
      audited_run(config);
    }
  }
  return {audits.problems.empty() && audits.runs > extra_before,
          fmt::format("{} runs audited, {} violations{}", audits.runs, audits.problems.size(),
                      audits.problems.empty() ? "" : ": " + audits.problems.front())};
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::warn);
  const std::vector<Criterion> criteria = {
      {"gradient-correctness", 1.0, gradient_correctness},
      {"fm-mf-reduction", 1.0, fm_mf_reduction},
      {"weighted-bce-reduction", 1.0, weighted_bce_reduction},
      {"metric-oracles", 1.0, metric_oracles},
      {"determinism", 30.0, determinism},
      {"synthetic-recovery", 10.0, synthetic_recovery},
      {"bubble-emergence", 180.0, bubble_emergence},
      {"intervention-direction", 180.0, intervention_direction},
      {"log-audit", 180.0, log_audit},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = seconds <= c.budget_seconds;
    const bool pass = v.pass && in_time;
    failures += !pass;
    std::cout << fmt::format("{} {} ({:.2f}s, budget {:.0f}s{}) {}\n", pass ? "PASS" : "FAIL",
                             c.name, seconds, c.budget_seconds, in_time ? "" : ", over budget",
                             v.detail);
  }
  std::cout << fmt::format("{}/{} criteria passed\n", criteria.size() - failures,
                           criteria.size());
  return failures == 0 ? 0 : 1;
}
