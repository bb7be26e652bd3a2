#include "bubblesim/simulation.hpp"

#include <atomic>
#include <exception>
#include <map>
#include <set>
#include <thread>

#include <fmt/core.h>
#include <spdlog/spdlog.h>

namespace bubblesim {

std::unique_ptr<FeedbackAgent> make_agent(const SimulationConfig& config) {
  switch (config.agent_backend) {
    case AgentBackend::kRule:
      return std::make_unique<RuleAgent>();
    case AgentBackend::kLlm: {
      RetryPolicy policy;
      policy.retries = config.llm.retries;
      policy.initial_backoff = std::chrono::milliseconds(config.llm.initial_backoff_ms);
      std::filesystem::path dir;
      if (config.llm.dump_transcripts) dir = config.transcript_dir;
      return std::make_unique<LlmAgent>(
          std::make_shared<HttpChatTransport>(config.llm.endpoint), policy, dir);
    }
    case AgentBackend::kTranscript:
      return std::make_unique<TranscriptAgent>(config.transcript_dir);
  }
  throw std::invalid_argument("unknown agent backend");
}

namespace {

struct UserSession {
  explicit UserSession(std::size_t window, std::uint64_t agent_seed,
                       std::uint64_t cold_seed)
      : history(window), agent_rng(agent_seed), cold_rng(cold_seed) {}

  AgentHistory history;
  Rng agent_rng;
  Rng cold_rng;
  ItemSet shown;
};

// Runs `work(u)` for every user with at most `limit` users in flight.
// Exceptions are rethrown for the lowest failing user index.
template <typename Work>
void for_each_user(std::size_t n_users, std::size_t limit, Work work) {
  const std::size_t n_threads = std::min(limit, n_users);
  if (n_threads <= 1) {
    for (std::size_t u = 0; u < n_users; ++u) work(u);
    return;
  }
  std::vector<std::exception_ptr> errors(n_users);
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> workers;
  workers.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t) {
    workers.emplace_back([&] {
      for (std::size_t u = next++; u < n_users; u = next++) {
        try {
          work(u);
        } catch (...) {
          errors[u] = std::current_exception();
        }
      }
    });
  }
  workers.clear();  // join
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

RunLog run(const SimulationConfig& config, const Catalog& catalog, FeedbackAgent* agent) {
  config.validate();
  const std::size_t needed =
      config.items_per_iteration * static_cast<std::size_t>(config.n_iterations);
  if (catalog.size() < needed) {
    throw SimulationError(fmt::format(
        "catalog has {} items but each user needs {} distinct items", catalog.size(), needed));
  }
  std::unique_ptr<FeedbackAgent> owned;
  if (agent == nullptr) {
    owned = make_agent(config);
    agent = owned.get();
  }

  RunLog log;
  log.config = config;
  log.categories = CategoryIndex::from(catalog);
  log.profiles = generate_profiles(config.n_users, derive_seed(config.seed, "users"),
                                   config.motivation_kind, catalog);
  std::vector<std::string> user_ids;
  for (const auto& p : log.profiles) user_ids.push_back(p.user_id);
  const auto weights = FeedbackWeights::of(config.weight_strategy);

  Recommender model(config.model_kind, log.profiles, catalog, config.training.dim,
                    config.training.init_std, derive_seed(config.seed, "model"));

  std::vector<UserSession> sessions;
  sessions.reserve(config.n_users);
  for (std::size_t u = 0; u < config.n_users; ++u) {
    sessions.emplace_back(config.history_window, derive_seed(config.seed, "agent", u),
                          derive_seed(config.seed, "cold-start", u));
  }

  std::vector<TrainSample> samples;
  const std::size_t k = config.items_per_iteration;
  for (int it = 0; it < config.n_iterations; ++it) {
    std::vector<std::vector<std::size_t>> slates(config.n_users);
    try {
      for (std::size_t u = 0; u < config.n_users; ++u) {
        slates[u] = it == 0 ? cold_start_slate(log.profiles[u], catalog, config.cscmr, k,
                                               sessions[u].cold_rng)
                            : model.recommend(u, k, sessions[u].shown, catalog);
        for (const auto i : slates[u]) sessions[u].shown.insert(i);
      }
    } catch (const InsufficientCandidates& e) {
      throw SimulationError(fmt::format("iteration {}: {}", it, e.what()));
    }

    std::vector<std::vector<FeedbackRecord>> feedback(config.n_users);
    try {
      for_each_user(config.n_users, config.max_in_flight, [&](std::size_t u) {
        auto& session = sessions[u];
        for (const auto i : slates[u]) {
          const auto& item = catalog.item(i);
          const auto decision = agent->decide(
              {log.profiles[u], session.history, item, it, session.agent_rng});
          session.history.push(item, decision.feedback);
          feedback[u].push_back(
              {log.profiles[u].user_id, item.item_id, it, decision.feedback, decision.explanation});
        }
      });
    } catch (const std::exception& e) {
      throw SimulationError(fmt::format("iteration {}: agent failure: {}", it, e.what()));
    }

    const std::size_t first_new = log.records.size();
    for (std::size_t u = 0; u < config.n_users; ++u) {
      Slate slate{it, user_ids[u], {}};
      for (const auto i : slates[u]) slate.item_ids.push_back(catalog.item(i).item_id);
      log.slates.push_back(std::move(slate));
      log.records.insert(log.records.end(), feedback[u].begin(), feedback[u].end());
    }
    log.metrics.push_back(
        compute_iteration_metrics(user_ids, log.categories, log.records, it, config.metrics));

    if (it + 1 == config.n_iterations) break;  // nothing left to recommend
    if (!config.training.cumulative_samples) samples.clear();
    for (std::size_t r = first_new; r < log.records.size(); ++r) {
      const auto& rec = log.records[r];
      auto sample = feedback_to_sample(rec.feedback, weights, config.training.label_mode);
      if (!sample) continue;
      // Each user contributes exactly k consecutive records per iteration.
      model.bind(*sample, (r - first_new) / k, catalog.index_of(rec.item_id));
      samples.push_back(std::move(*sample));
    }
    if (samples.empty()) {
      spdlog::debug("iteration {}: no weighted samples; model unchanged", it);
      continue;
    }
    TrainOptions opts;
    opts.epochs = config.training.epochs_per_iteration;
    opts.learning_rate = config.training.learning_rate;
    opts.l2 = config.training.l2;
    opts.seed = derive_seed(config.seed, "train", static_cast<std::uint64_t>(it));
    try {
      const double loss = model.train(samples, opts);
      spdlog::debug("iteration {}: trained on {} samples, loss {:.5f}", it, samples.size(), loss);
    } catch (const TrainingDiverged& e) {
      throw SimulationError(fmt::format("iteration {}: {}", it, e.what()));
    }
  }
  return log;
}

std::vector<std::string> audit_run(std::span<const FeedbackRecord> records,
                                   std::span<const Slate> slates,
                                   std::span<const std::string> user_ids,
                                   std::size_t items_per_iteration, int n_iterations) {
  std::vector<std::string> problems;
  std::map<std::pair<std::string, int>, const Slate*> slate_of;
  for (const auto& s : slates) {
    if (!slate_of.emplace(std::pair{s.user_id, s.iteration}, &s).second) {
      problems.push_back(fmt::format("duplicate slate for {} in iteration {}", s.user_id, s.iteration));
    }
    if (s.item_ids.size() != items_per_iteration) {
      problems.push_back(fmt::format("slate for {} in iteration {} has {} items", s.user_id,
                                     s.iteration, s.item_ids.size()));
    }
  }
  std::map<std::pair<std::string, int>, std::size_t> per_cell;
  std::map<std::string, std::set<std::string>> seen;
  std::set<std::tuple<std::string, std::string, int>> keys;
  for (const auto& r : records) {
    ++per_cell[{r.user_id, r.iteration}];
    if (!keys.emplace(r.user_id, r.item_id, r.iteration).second) {
      problems.push_back(fmt::format("duplicate record ({}, {}, {})", r.user_id, r.item_id, r.iteration));
    }
    if (!seen[r.user_id].insert(r.item_id).second) {
      problems.push_back(fmt::format("item {} shown to {} more than once", r.item_id, r.user_id));
    }
    const auto s = slate_of.find({r.user_id, r.iteration});
    if (s == slate_of.end()) {
      problems.push_back(fmt::format("record for {} in iteration {} has no slate", r.user_id, r.iteration));
    } else if (std::find(s->second->item_ids.begin(), s->second->item_ids.end(), r.item_id) ==
               s->second->item_ids.end()) {
      problems.push_back(fmt::format("item {} not in slate of {} iteration {}", r.item_id,
                                     r.user_id, r.iteration));
    }
  }
  for (const auto& u : user_ids) {
    for (int it = 0; it < n_iterations; ++it) {
      const auto c = per_cell.find({u, it});
      const std::size_t n = c == per_cell.end() ? 0 : c->second;
      if (n != items_per_iteration) {
        problems.push_back(fmt::format("{} has {} records in iteration {}", u, n, it));
      }
    }
  }
  return problems;
}

}  // namespace bubblesim
