#include <fstream>
#include <set>

#include <fmt/core.h>

#include "bubblesim/simulation.hpp"

namespace bubblesim {

using ojson = nlohmann::ordered_json;

std::string_view to_string(AgentBackend b) {
  switch (b) {
    case AgentBackend::kRule: return "rule";
    case AgentBackend::kLlm: return "llm";
    case AgentBackend::kTranscript: return "transcript";
  }
  return "?";
}

AgentBackend parse_agent_backend(std::string_view text) {
  if (text == "rule") return AgentBackend::kRule;
  if (text == "llm") return AgentBackend::kLlm;
  if (text == "transcript") return AgentBackend::kTranscript;
  throw std::invalid_argument(fmt::format("unknown agent backend '{}'", text));
}

void SimulationConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
  if (n_users == 0) fail("n_users must be positive");
  if (items_per_iteration == 0) fail("items_per_iteration must be positive");
  if (n_iterations <= 0) fail("n_iterations must be positive");
  if (!is_valid_cscmr(cscmr)) fail(fmt::format("cscmr must be 0, 25, 50, 75 or 100 (got {})", cscmr));
  if (training.dim == 0) fail("training.dim must be positive");
  if (training.epochs_per_iteration <= 0) fail("training.epochs_per_iteration must be positive");
  if (!(training.learning_rate >= 0)) fail("training.learning_rate must be >= 0");
  if (!(training.l2 >= 0)) fail("training.l2 must be >= 0");
  if (!(training.init_std >= 0)) fail("training.init_std must be >= 0");
  if (history_window == 0) fail("history_window must be positive");
  if (max_in_flight == 0) fail("max_in_flight must be positive");
  if (llm.retries < 0) fail("llm.retries must be >= 0");
  if (llm.endpoint.timeout_ms <= 0) fail("llm.timeout_ms must be positive");
  if (agent_backend == AgentBackend::kTranscript && transcript_dir.empty()) {
    fail("transcript backend needs transcript_dir");
  }
}

ojson config_to_json(const SimulationConfig& c) {
  ojson j;
  j["n_users"] = c.n_users;
  j["items_per_iteration"] = c.items_per_iteration;
  j["n_iterations"] = c.n_iterations;
  j["model_kind"] = to_string(c.model_kind);
  j["weight_strategy"] = to_string(c.weight_strategy);
  j["cscmr"] = c.cscmr;
  j["motivation_kind"] = to_string(c.motivation_kind);
  j["agent_backend"] = to_string(c.agent_backend);
  j["seed"] = c.seed;
  j["training"] = {{"dim", c.training.dim},
                   {"learning_rate", c.training.learning_rate},
                   {"l2", c.training.l2},
                   {"epochs_per_iteration", c.training.epochs_per_iteration},
                   {"init_std", c.training.init_std},
                   {"label_mode", to_string(c.training.label_mode)},
                   {"cumulative_samples", c.training.cumulative_samples}};
  j["metric_window"] = to_string(c.metrics.window);
  j["watched_mode"] = to_string(c.metrics.watched);
  j["history_window"] = c.history_window;
  j["max_in_flight"] = c.max_in_flight;
  j["llm"] = {{"base_url", c.llm.endpoint.base_url},
              {"model", c.llm.endpoint.model},
              {"api_key_env", c.llm.endpoint.api_key_env},
              {"temperature", c.llm.endpoint.temperature},
              {"timeout_ms", c.llm.endpoint.timeout_ms},
              {"retries", c.llm.retries},
              {"initial_backoff_ms", c.llm.initial_backoff_ms},
              {"dump_transcripts", c.llm.dump_transcripts}};
  j["transcript_dir"] = c.transcript_dir;
  return j;
}

namespace {

// Keys written by write_run_dir next to the config snapshot.
const std::set<std::string> kRunDirKeys = {"catalog_level_totals"};

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known,
                    const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key) && !(where.empty() && kRunDirKeys.contains(key))) {
      throw std::invalid_argument(fmt::format("unknown config key '{}{}'", where, key));
    }
  }
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (const auto it = j.find(key); it != j.end()) {
    try {
      out = it->get<T>();
    } catch (const nlohmann::json::exception&) {
      throw std::invalid_argument(fmt::format("config key '{}' has the wrong type", key));
    }
  }
}

template <typename Parse, typename T>
void read_enum(const nlohmann::json& j, const char* key, Parse parse, T& out) {
  std::string text;
  read(j, key, text);
  if (!text.empty()) out = parse(text);
}

}  // namespace

SimulationConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  reject_unknown(j,
                 {"n_users", "items_per_iteration", "n_iterations", "model_kind",
                  "weight_strategy", "cscmr", "motivation_kind", "agent_backend", "seed",
                  "training", "metric_window", "watched_mode", "history_window",
                  "max_in_flight", "llm", "transcript_dir"},
                 "");
  SimulationConfig c;
  read(j, "n_users", c.n_users);
  read(j, "items_per_iteration", c.items_per_iteration);
  read(j, "n_iterations", c.n_iterations);
  read_enum(j, "model_kind", parse_model_kind, c.model_kind);
  read_enum(j, "weight_strategy", parse_weight_strategy, c.weight_strategy);
  read(j, "cscmr", c.cscmr);
  read_enum(j, "motivation_kind", parse_motivation_kind, c.motivation_kind);
  read_enum(j, "agent_backend", parse_agent_backend, c.agent_backend);
  read(j, "seed", c.seed);
  if (const auto t = j.find("training"); t != j.end()) {
    reject_unknown(*t,
                   {"dim", "learning_rate", "l2", "epochs_per_iteration", "init_std",
                    "label_mode", "cumulative_samples"},
                   "training.");
    read(*t, "dim", c.training.dim);
    read(*t, "learning_rate", c.training.learning_rate);
    read(*t, "l2", c.training.l2);
    read(*t, "epochs_per_iteration", c.training.epochs_per_iteration);
    read(*t, "init_std", c.training.init_std);
    read_enum(*t, "label_mode", parse_label_mode, c.training.label_mode);
    read(*t, "cumulative_samples", c.training.cumulative_samples);
  }
  read_enum(j, "metric_window", parse_metric_window, c.metrics.window);
  read_enum(j, "watched_mode", parse_watched_mode, c.metrics.watched);
  read(j, "history_window", c.history_window);
  read(j, "max_in_flight", c.max_in_flight);
  if (const auto l = j.find("llm"); l != j.end()) {
    reject_unknown(*l,
                   {"base_url", "model", "api_key_env", "temperature", "timeout_ms",
                    "retries", "initial_backoff_ms", "dump_transcripts"},
                   "llm.");
    read(*l, "base_url", c.llm.endpoint.base_url);
    read(*l, "model", c.llm.endpoint.model);
    read(*l, "api_key_env", c.llm.endpoint.api_key_env);
    read(*l, "temperature", c.llm.endpoint.temperature);
    read(*l, "timeout_ms", c.llm.endpoint.timeout_ms);
    read(*l, "retries", c.llm.retries);
    read(*l, "initial_backoff_ms", c.llm.initial_backoff_ms);
    read(*l, "dump_transcripts", c.llm.dump_transcripts);
  }
  read(j, "transcript_dir", c.transcript_dir);
  c.validate();
  return c;
}

SimulationConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument(fmt::format("cannot open config '{}'", path.string()));
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(fmt::format("config '{}': {}", path.string(), e.what()));
  }
  return config_from_json(j);
}

}  // namespace bubblesim
