#include "core/http_util.hpp"

#include "core/error.hpp"
#include "httplib.h"

namespace finrag {

Endpoint parse_endpoint(std::string_view base_url) {
  auto scheme_end = base_url.find("://");
  if (scheme_end == std::string_view::npos)
    fail(ErrorCode::kConfig, "endpoint must include a scheme: '" + std::string(base_url) + "'");
  auto path_start = base_url.find('/', scheme_end + 3);
  Endpoint e;
  e.origin = std::string(base_url.substr(0, path_start));
  if (path_start != std::string_view::npos) {
    e.path_prefix = std::string(base_url.substr(path_start));
    while (!e.path_prefix.empty() && e.path_prefix.back() == '/') e.path_prefix.pop_back();
  }
  return e;
}

HttpOutcome post_json(const Endpoint& endpoint, std::string_view path,
                      const std::string& body, const std::string& api_key,
                      std::chrono::milliseconds timeout) {
  HttpOutcome outcome;
  httplib::Client client(endpoint.origin);
  if (!client.is_valid()) {
    outcome.failure = HttpFailure::kTransport;
    outcome.detail = "invalid endpoint '" + endpoint.origin + "'";
    return outcome;
  }
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  httplib::Headers headers;
  if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);

  const auto start = std::chrono::steady_clock::now();
  auto res = client.Post(endpoint.path_prefix + std::string(path), headers, body,
                         "application/json");
  if (!res) {
    const auto elapsed = std::chrono::steady_clock::now() - start;
    const auto err = res.error();
    outcome.failure = (err == httplib::Error::ConnectionTimeout ||
                       (err == httplib::Error::Read && elapsed >= timeout * 9 / 10))
                          ? HttpFailure::kTimeout
                          : HttpFailure::kTransport;
    outcome.detail = httplib::to_string(err);
    return outcome;
  }
  outcome.status = res->status;
  outcome.body = res->body;
  return outcome;
}

}  // namespace finrag
