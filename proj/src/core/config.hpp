#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>

#include "core/embed.hpp"
#include "core/llmgateway.hpp"
#include "json.hpp"

namespace finrag {

enum class CompleterKind { kRemote, kScripted };

/// Runtime configuration. Precedence when resolved: explicit overrides >
/// environment > config file > defaults. API keys come from the environment
/// only and are never written out by config_to_json.
struct AppConfig {
  std::string dataset_path;
  std::string index_path = "finrag.frix";
  EmbedderProfile embedder;
  ModelProfile base_model;
  ModelProfile enhanced_model;
  CompleterKind completer = CompleterKind::kRemote;
  std::size_t k = 5;
  std::size_t context_budget = 1024;
  std::string bind = "127.0.0.1:8080";
  int max_in_flight = 4;

  std::string llm_api_base;
  std::string llm_api_key;
  std::string embed_api_base;
  std::string embed_api_key;

  AppConfig();
  void validate() const;
};

using EnvLookup = std::function<std::optional<std::string>(const char*)>;

EnvLookup process_environment();

// Same schema for config files and override objects.
void apply_config_json(AppConfig& config, const nlohmann::json& doc);
void apply_environment(AppConfig& config, const EnvLookup& env);

AppConfig resolve_config(const std::optional<std::string>& config_path, const EnvLookup& env,
                         const nlohmann::json& overrides);

nlohmann::json config_to_json(const AppConfig& config);

}  // namespace finrag
