#include <map>

#include <fmt/core.h>
#include <spdlog/spdlog.h>

#include "bubblesim/simulation.hpp"

namespace bubblesim {

std::string_view to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::kCscmr: return "cscmr";
    case SweepAxis::kWeightStrategy: return "weight_strategy";
    case SweepAxis::kMotivationKind: return "motivation_kind";
    case SweepAxis::kModelKind: return "model_kind";
  }
  return "?";
}

SweepAxis parse_sweep_axis(std::string_view text) {
  for (auto a : {SweepAxis::kCscmr, SweepAxis::kWeightStrategy, SweepAxis::kMotivationKind,
                 SweepAxis::kModelKind}) {
    if (to_string(a) == text) return a;
  }
  throw std::invalid_argument(fmt::format(
      "unknown sweep axis '{}' (expected cscmr, weight_strategy, motivation_kind or "
      "model_kind)",
      text));
}

SimulationConfig apply_axis(SimulationConfig c, SweepAxis axis, const std::string& value) {
  switch (axis) {
    case SweepAxis::kCscmr: {
      std::size_t used = 0;
      int v = 0;
      try {
        v = std::stoi(value, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != value.size() || !is_valid_cscmr(v)) {
        throw std::invalid_argument(fmt::format("bad cscmr value '{}'", value));
      }
      c.cscmr = v;
      break;
    }
    case SweepAxis::kWeightStrategy: c.weight_strategy = parse_weight_strategy(value); break;
    case SweepAxis::kMotivationKind: c.motivation_kind = parse_motivation_kind(value); break;
    case SweepAxis::kModelKind: c.model_kind = parse_model_kind(value); break;
  }
  return c;
}

SweepReport run_sweep(const SimulationConfig& base, SweepAxis axis,
                      const std::vector<std::string>& values,
                      const std::vector<std::uint64_t>& seeds, const Catalog& catalog,
                      const std::optional<std::filesystem::path>& out_dir) {
  if (values.empty()) throw std::invalid_argument("sweep: no axis values");
  if (seeds.empty()) throw std::invalid_argument("sweep: no seeds");
  // Validate every value before the first run.
  for (const auto& v : values) apply_axis(base, axis, v);

  SweepReport report{axis, values, seeds, {}};
  for (const auto& value : values) {
    for (const auto seed : seeds) {
      auto config = apply_axis(base, axis, value);
      config.seed = seed;
      SweepRun entry{value, seed, false, {}, {}};
      std::filesystem::path dir;
      if (out_dir) {
        dir = *out_dir / fmt::format("{}={}", to_string(axis), value) /
              fmt::format("seed={}", seed);
        std::filesystem::create_directories(dir);
        if (config.agent_backend == AgentBackend::kLlm) config.transcript_dir = (dir / "transcripts").string();
      }
      try {
        const auto log = run(config, catalog);
        entry.metrics = log.metrics;
        entry.ok = true;
        if (out_dir) write_run_dir(log, dir);
      } catch (const std::exception& e) {
        entry.error = e.what();
        spdlog::error("sweep run {}={} seed {} failed: {}", to_string(axis), value, seed,
                      e.what());
      }
      report.runs.push_back(std::move(entry));
    }
  }
  return report;
}

namespace {

void write_levels(std::ostream& out, const std::array<double, kNumLevels>& v) {
  for (const double x : v) out << ',' << fmt::format("{}", x);
}

}  // namespace

void write_sweep_summary(std::ostream& out, const SweepReport& report) {
  out << "axis,value,seed,iteration,mean_entropy_l1,mean_entropy_l2,mean_entropy_l3,"
         "mean_satisfaction,bubble_proportion_l1,bubble_proportion_l2,bubble_proportion_l3\n";
  for (const auto& r : report.runs) {
    if (!r.ok) continue;
    for (const auto& m : r.metrics) {
      out << fmt::format("{},{},{},{}", to_string(report.axis), r.value, r.seed, m.iteration);
      write_levels(out, m.mean_entropy);
      out << fmt::format(",{}", m.mean_satisfaction);
      write_levels(out, m.bubble_proportion);
      out << '\n';
    }
  }
}

void write_sweep_aggregate(std::ostream& out, const SweepReport& report) {
  out << "axis,value,iteration,n_seeds,mean_entropy_l1,mean_entropy_l2,mean_entropy_l3,"
         "mean_satisfaction,bubble_proportion_l1,bubble_proportion_l2,bubble_proportion_l3\n";
  for (const auto& value : report.values) {
    struct Acc {
      std::size_t n = 0;
      std::array<double, kNumLevels> entropy{}, bubble{};
      double satisfaction = 0.0;
    };
    std::map<int, Acc> by_iteration;
    for (const auto& r : report.runs) {
      if (!r.ok || r.value != value) continue;
      for (const auto& m : r.metrics) {
        auto& a = by_iteration[m.iteration];
        ++a.n;
        for (int l = 0; l < kNumLevels; ++l) {
          a.entropy[l] += m.mean_entropy[l];
          a.bubble[l] += m.bubble_proportion[l];
        }
        a.satisfaction += m.mean_satisfaction;
      }
    }
    for (auto& [iteration, a] : by_iteration) {
      const double n = static_cast<double>(a.n);
      for (int l = 0; l < kNumLevels; ++l) {
        a.entropy[l] /= n;
        a.bubble[l] /= n;
      }
      out << fmt::format("{},{},{},{}", to_string(report.axis), value, iteration, a.n);
      write_levels(out, a.entropy);
      out << fmt::format(",{}", a.satisfaction / n);
      write_levels(out, a.bubble);
      out << '\n';
    }
  }
}

}  // namespace bubblesim
