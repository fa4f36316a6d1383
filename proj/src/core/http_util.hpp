#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace finrag {

// "http://host:port/v1" -> origin "http://host:port", prefix "/v1".
struct Endpoint {
  std::string origin;
  std::string path_prefix;
};

Endpoint parse_endpoint(std::string_view base_url);

enum class HttpFailure { kNone, kTransport, kTimeout };

struct HttpOutcome {
  int status = 0;  // 0 when no response was received
  std::string body;
  HttpFailure failure = HttpFailure::kNone;
  std::string detail;

  bool ok() const { return failure == HttpFailure::kNone && status >= 200 && status < 300; }
  // 5xx, 429 and transport failures are worth another attempt.
  bool retryable() const {
    return failure != HttpFailure::kNone || status == 429 || status >= 500;
  }
};

HttpOutcome post_json(const Endpoint& endpoint, std::string_view path,
                      const std::string& body, const std::string& api_key,
                      std::chrono::milliseconds timeout);

}  // namespace finrag
