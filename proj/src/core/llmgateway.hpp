#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include "core/error.hpp"

namespace finrag {

// ceil(code points / 4); the one estimator used for passage caps and
// context budgets.
std::size_t estimate_tokens(std::string_view text);

enum class Role { kSystem, kUser };

std::string_view role_name(Role role);

struct ChatMessage {
  Role role;
  std::string content;

  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

struct TokenUsage {
  std::size_t prompt_tokens = 0;
  std::size_t completion_tokens = 0;
};

struct ChatExchange {
  std::vector<ChatMessage> messages;
  std::string answer;
  double latency_ms = 0.0;
  std::optional<TokenUsage> usage;
  int retries = 0;
};

struct ModelProfile {
  std::string name = "gpt-3.5-turbo";
  std::string endpoint_base;
  double temperature = 0.0;
  std::chrono::milliseconds timeout{30000};
  int max_retries = 2;
  std::chrono::milliseconds backoff_base{250};
  int max_in_flight = 4;

  void validate() const;
};

class Completer {
 public:
  virtual ~Completer() = default;
  virtual ChatExchange complete(const std::vector<ChatMessage>& messages) const = 0;
  virtual std::string_view model_name() const = 0;
};

/// OpenAI-compatible /chat/completions client.
class RemoteCompleter final : public Completer {
 public:
  RemoteCompleter(ModelProfile profile, std::string api_key);

  ChatExchange complete(const std::vector<ChatMessage>& messages) const override;
  std::string_view model_name() const override { return profile_.name; }

  // Exact request body sent on every attempt.
  std::string request_body(const std::vector<ChatMessage>& messages) const;

 private:
  ModelProfile profile_;
  std::string api_key_;
  mutable std::counting_semaphore<1024> in_flight_;
};

inline constexpr std::string_view kInsufficientContext = "INSUFFICIENT CONTEXT";

/// Deterministic test double that answers only from passages in the prompt.
ChatExchange scripted_complete(const std::vector<ChatMessage>& messages);

class ScriptedCompleter final : public Completer {
 public:
  explicit ScriptedCompleter(std::string model = "scripted") : model_(std::move(model)) {}

  ChatExchange complete(const std::vector<ChatMessage>& messages) const override;
  std::string_view model_name() const override { return model_; }

 private:
  std::string model_;
};

}  // namespace finrag
