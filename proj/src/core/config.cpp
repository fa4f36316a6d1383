#include "core/config.hpp"

#include <cstdlib>
#include <fstream>

namespace finrag {

using nlohmann::json;

namespace {

void apply_model(ModelProfile& model, const json& doc) {
  if (!doc.is_object()) fail(ErrorCode::kConfig, "model profile must be an object");
  model.name = doc.value("name", model.name);
  model.temperature = doc.value("temperature", model.temperature);
  model.timeout = std::chrono::milliseconds(doc.value("timeout_ms", model.timeout.count()));
  model.max_retries = doc.value("max_retries", model.max_retries);
  model.backoff_base =
      std::chrono::milliseconds(doc.value("backoff_ms", model.backoff_base.count()));
}

json model_json(const ModelProfile& m) {
  return {{"name", m.name},
          {"temperature", m.temperature},
          {"timeout_ms", m.timeout.count()},
          {"max_retries", m.max_retries},
          {"backoff_ms", m.backoff_base.count()}};
}

}  // namespace

AppConfig::AppConfig() {
  base_model.name = "gpt-3.5-turbo";
  enhanced_model.name = "gpt-3.5-turbo-1106";
}

void AppConfig::validate() const {
  if (k < 1) fail(ErrorCode::kConfig, "k must be >= 1");
  if (context_budget < 1) fail(ErrorCode::kConfig, "context_budget must be >= 1");
  if (max_in_flight < 1) fail(ErrorCode::kConfig, "max_in_flight must be >= 1");
  embedder.validate();
  base_model.validate();
  enhanced_model.validate();
}

EnvLookup process_environment() {
  return [](const char* name) -> std::optional<std::string> {
    const char* v = std::getenv(name);
    if (!v || !*v) return std::nullopt;
    return std::string(v);
  };
}

void apply_config_json(AppConfig& c, const json& doc) {
  if (doc.is_null()) return;
  if (!doc.is_object()) fail(ErrorCode::kConfig, "configuration must be a JSON object");
  for (const char* secret : {"llm_api_key", "embed_api_key", "api_key"})
    if (doc.contains(secret))
      fail(ErrorCode::kConfig,
           std::string(secret) + " may only be supplied through the environment");
  for (const char* count : {"k", "context_budget", "max_in_flight"})
    if (doc.contains(count) && !(doc[count].is_number_integer() && doc[count].get<long long>() >= 1))
      fail(ErrorCode::kConfig, std::string(count) + " must be a positive integer");
  try {
    c.dataset_path = doc.value("dataset_path", c.dataset_path);
    c.index_path = doc.value("index_path", c.index_path);
    c.k = doc.value("k", c.k);
    c.context_budget = doc.value("context_budget", c.context_budget);
    c.bind = doc.value("bind", c.bind);
    c.max_in_flight = doc.value("max_in_flight", c.max_in_flight);
    c.llm_api_base = doc.value("llm_api_base", c.llm_api_base);
    c.embed_api_base = doc.value("embed_api_base", c.embed_api_base);
    if (doc.contains("completer")) {
      const auto kind = doc["completer"].get<std::string>();
      if (kind == "remote") c.completer = CompleterKind::kRemote;
      else if (kind == "scripted") c.completer = CompleterKind::kScripted;
      else fail(ErrorCode::kConfig, "completer must be 'remote' or 'scripted'");
    }
    if (doc.contains("embedder")) {
      const json& e = doc["embedder"];
      if (!e.is_object()) fail(ErrorCode::kConfig, "embedder must be an object");
      if (e.contains("kind")) {
        const auto kind = e["kind"].get<std::string>();
        if (kind == "remote") c.embedder.kind = EmbedderKind::kRemote;
        else if (kind == "local-hash") c.embedder.kind = EmbedderKind::kLocalHash;
        else fail(ErrorCode::kConfig, "embedder.kind must be 'remote' or 'local-hash'");
      }
      c.embedder.model_name = e.value("model", c.embedder.model_name);
      c.embedder.dim = e.value("dim", c.embedder.dim);
      c.embedder.normalize = e.value("normalize", c.embedder.normalize);
      c.embedder.batch_size = e.value("batch_size", c.embedder.batch_size);
      c.embedder.timeout = std::chrono::milliseconds(e.value("timeout_ms", c.embedder.timeout.count()));
      c.embedder.max_retries = e.value("max_retries", c.embedder.max_retries);
      c.embedder.backoff_base =
          std::chrono::milliseconds(e.value("backoff_ms", c.embedder.backoff_base.count()));
    }
    if (doc.contains("models")) {
      const json& m = doc["models"];
      if (m.contains("base")) apply_model(c.base_model, m["base"]);
      if (m.contains("enhanced")) apply_model(c.enhanced_model, m["enhanced"]);
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfig, std::string("invalid configuration value: ") + e.what());
  }
}

void apply_environment(AppConfig& c, const EnvLookup& env) {
  if (auto v = env("LLM_API_BASE")) c.llm_api_base = *v;
  if (auto v = env("LLM_API_KEY")) c.llm_api_key = *v;
  if (auto v = env("EMBED_API_BASE")) c.embed_api_base = *v;
  if (auto v = env("EMBED_API_KEY")) c.embed_api_key = *v;
}

AppConfig resolve_config(const std::optional<std::string>& config_path, const EnvLookup& env,
                         const json& overrides) {
  AppConfig c;
  if (config_path) {
    std::ifstream in(*config_path);
    if (!in) fail(ErrorCode::kConfig, "cannot open config file '" + *config_path + "'");
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) fail(ErrorCode::kConfig, "config file is not valid JSON");
    apply_config_json(c, doc);
  }
  apply_environment(c, env);
  apply_config_json(c, overrides);

  for (ModelProfile* m : {&c.base_model, &c.enhanced_model}) {
    m->endpoint_base = c.llm_api_base;
    m->max_in_flight = c.max_in_flight;
  }
  c.embedder.endpoint_base = c.embed_api_base;
  c.embedder.max_in_flight = c.max_in_flight;
  c.validate();
  return c;
}

json config_to_json(const AppConfig& c) {
  return {{"dataset_path", c.dataset_path},
          {"index_path", c.index_path},
          {"completer", c.completer == CompleterKind::kRemote ? "remote" : "scripted"},
          {"embedder",
           {{"kind", c.embedder.kind == EmbedderKind::kRemote ? "remote" : "local-hash"},
            {"model", c.embedder.model_name},
            {"dim", c.embedder.dim},
            {"normalize", c.embedder.normalize},
            {"batch_size", c.embedder.batch_size},
            {"timeout_ms", c.embedder.timeout.count()},
            {"max_retries", c.embedder.max_retries},
            {"backoff_ms", c.embedder.backoff_base.count()}}},
          {"models", {{"base", model_json(c.base_model)}, {"enhanced", model_json(c.enhanced_model)}}},
          {"k", c.k},
          {"context_budget", c.context_budget},
          {"bind", c.bind},
          {"max_in_flight", c.max_in_flight},
          {"llm_api_base", c.llm_api_base},
          {"embed_api_base", c.embed_api_base}};
}

}  // namespace finrag
