#include "core/llmgateway.hpp"

#include <thread>

#include "core/docbuild.hpp"
#include "core/http_util.hpp"
#include "core/ingest.hpp"
#include "core/text_util.hpp"
#include "json.hpp"

namespace finrag {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

bool is_word_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return (u >= 'a' && u <= 'z') || (u >= 'A' && u <= 'Z') || (u >= '0' && u <= '9') || u >= 0x80;
}

// Case-sensitive occurrence of `needle` bounded by non-word characters.
bool contains_word(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return false;
  for (auto pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + 1)) {
    const bool left = pos == 0 || !is_word_char(haystack[pos - 1]);
    const auto end = pos + needle.size();
    const bool right = end == haystack.size() || !is_word_char(haystack[end]);
    if (left && right) return true;
  }
  return false;
}

struct ContextFact {
  std::string indicator;
  std::string amount;
};

struct ContextPassage {
  std::string period;
  std::string company;
  std::string ticker;
  std::vector<ContextFact> facts;
};

// Parses "For the quarter ending D, C (T) reported I of A USD[; ...]."
std::optional<ContextPassage> parse_passage_line(std::string_view line) {
  constexpr std::string_view kLead = "For the quarter ending ";
  constexpr std::string_view kReported = ") reported ";
  line = trim(line);
  if (line.substr(0, kLead.size()) != kLead) return std::nullopt;
  line.remove_prefix(kLead.size());
  auto comma = line.find(", ");
  auto reported = line.find(kReported);
  if (comma == std::string_view::npos || reported == std::string_view::npos || reported < comma)
    return std::nullopt;
  ContextPassage p;
  p.period = std::string(line.substr(0, comma));
  auto who = line.substr(comma + 2, reported - comma - 2);
  auto open = who.rfind(" (");
  if (open == std::string_view::npos) return std::nullopt;
  p.company = std::string(who.substr(0, open));
  p.ticker = std::string(who.substr(open + 2));

  auto rest = line.substr(reported + kReported.size());
  if (!rest.empty() && rest.back() == '.') rest.remove_suffix(1);
  while (!rest.empty()) {
    auto sep = rest.find("; ");
    auto item = rest.substr(0, sep);
    rest = sep == std::string_view::npos ? std::string_view{} : rest.substr(sep + 2);
    constexpr std::string_view kUsd = " USD";
    if (item.size() <= kUsd.size() || item.substr(item.size() - kUsd.size()) != kUsd) continue;
    item.remove_suffix(kUsd.size());
    auto of = item.rfind(" of ");
    if (of == std::string_view::npos) continue;
    p.facts.push_back({std::string(item.substr(0, of)), std::string(item.substr(of + 4))});
  }
  return p;
}

// First passage (in context order) naming the asked entity and period wins;
// within it, the longest indicator named in the question.
std::string scripted_answer(std::string_view context, std::string_view question) {
  const std::string question_lower = to_lower(question);
  std::size_t start = 0;
  while (start < context.size()) {
    auto end = context.find('\n', start);
    if (end == std::string_view::npos) end = context.size();
    auto parsed = parse_passage_line(context.substr(start, end - start));
    start = end + 1;
    if (!parsed) continue;
    const bool names_entity = contains_word(question_lower, to_lower(parsed->company)) ||
                              contains_word(question, parsed->ticker);
    if (!names_entity || !contains_word(question, parsed->period)) continue;
    const ContextFact* best = nullptr;
    for (const auto& fact : parsed->facts) {
      if (!contains_word(question_lower, to_lower(fact.indicator))) continue;
      if (!best || fact.indicator.size() > best->indicator.size()) best = &fact;
    }
    if (best) return best->amount;
  }
  return std::string(kInsufficientContext);
}

}  // namespace

std::size_t estimate_tokens(std::string_view text) {
  return (utf8_length(text) + 3) / 4;
}

std::string_view role_name(Role role) {
  return role == Role::kSystem ? "system" : "user";
}

void ModelProfile::validate() const {
  if (temperature < 0.0) fail(ErrorCode::kConfig, "temperature must be >= 0");
  if (timeout.count() <= 0) fail(ErrorCode::kConfig, "timeout must be positive");
  if (max_retries < 0) fail(ErrorCode::kConfig, "max_retries must be >= 0");
  if (max_in_flight < 1) fail(ErrorCode::kConfig, "max_in_flight must be >= 1");
}

RemoteCompleter::RemoteCompleter(ModelProfile profile, std::string api_key)
    : profile_(std::move(profile)),
      api_key_(std::move(api_key)),
      in_flight_(profile_.max_in_flight) {
  profile_.validate();
}

std::string RemoteCompleter::request_body(const std::vector<ChatMessage>& messages) const {
  json msgs = json::array();
  for (const auto& m : messages) msgs.push_back({{"role", role_name(m.role)}, {"content", m.content}});
  json body = {{"model", profile_.name}, {"messages", msgs}, {"temperature", profile_.temperature}};
  return body.dump();
}

ChatExchange RemoteCompleter::complete(const std::vector<ChatMessage>& messages) const {
  if (messages.empty()) fail(ErrorCode::kUpstreamRejected, "empty message list");
  if (profile_.endpoint_base.empty())
    fail(ErrorCode::kConfig, "no chat completion endpoint configured (set LLM_API_BASE)");
  const std::string body = request_body(messages);
  const Endpoint endpoint = parse_endpoint(profile_.endpoint_base);

  in_flight_.acquire();
  struct Release {
    std::counting_semaphore<1024>& s;
    ~Release() { s.release(); }
  } release{in_flight_};

  ChatExchange exchange;
  exchange.messages = messages;
  const auto start = Clock::now();
  HttpOutcome outcome;
  for (int attempt = 0;; ++attempt) {
    outcome = post_json(endpoint, "/chat/completions", body, api_key_, profile_.timeout);
    if (outcome.ok() || !outcome.retryable() || attempt >= profile_.max_retries) break;
    ++exchange.retries;
    std::this_thread::sleep_for(profile_.backoff_base * (1 << attempt));
  }
  exchange.latency_ms = elapsed_ms(start);

  if (outcome.failure == HttpFailure::kTimeout)
    fail(ErrorCode::kTimeout, "chat completion timed out after " +
                                  std::to_string(exchange.retries + 1) + " attempt(s)");
  if (outcome.failure == HttpFailure::kTransport)
    fail(ErrorCode::kUpstreamUnavailable, "chat completion transport error: " + outcome.detail);
  if (!outcome.ok()) {
    const auto code = outcome.retryable() ? ErrorCode::kUpstreamUnavailable
                                          : ErrorCode::kUpstreamRejected;
    fail(code, "chat completion returned HTTP " + std::to_string(outcome.status));
  }

  json doc = json::parse(outcome.body, nullptr, false);
  try {
    exchange.answer = doc.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception&) {
    fail(ErrorCode::kUpstreamUnavailable, "chat completion response lacks choices[0].message.content");
  }
  if (doc.contains("usage") && doc["usage"].is_object()) {
    TokenUsage usage;
    usage.prompt_tokens = doc["usage"].value("prompt_tokens", std::size_t{0});
    usage.completion_tokens = doc["usage"].value("completion_tokens", std::size_t{0});
    exchange.usage = usage;
  }
  return exchange;
}

ChatExchange scripted_complete(const std::vector<ChatMessage>& messages) {
  if (messages.empty()) fail(ErrorCode::kUpstreamRejected, "empty message list");
  const auto start = Clock::now();
  ChatExchange exchange;
  exchange.messages = messages;

  const ChatMessage* user = nullptr;
  for (const auto& m : messages)
    if (m.role == Role::kUser) user = &m;

  std::string_view context;
  std::string_view question;
  if (user) {
    std::string_view content = user->content;
    constexpr std::string_view kContext = "Context:\n";
    constexpr std::string_view kQuestion = "\n\nQuestion: ";
    auto q = content.rfind(kQuestion);
    if (content.substr(0, kContext.size()) == kContext && q != std::string_view::npos) {
      context = content.substr(kContext.size(), q - kContext.size());
      question = content.substr(q + kQuestion.size());
    } else {
      question = content;
    }
  }
  exchange.answer = scripted_answer(context, question);
  exchange.latency_ms = elapsed_ms(start);
  return exchange;
}

ChatExchange ScriptedCompleter::complete(const std::vector<ChatMessage>& messages) const {
  return scripted_complete(messages);
}

}  // namespace finrag
