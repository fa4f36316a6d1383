#include "core/service.hpp"

#include <charconv>

#include "httplib.h"
#include "json.hpp"

namespace finrag {
namespace {

using nlohmann::json;

HttpReply error_reply(int status, const std::string& message) {
  return {status, json{{"error", message}}.dump()};
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptyQuestion:
    case ErrorCode::kInvalidArgument:
      return 400;
    case ErrorCode::kEmbedderUnavailable:
    case ErrorCode::kUpstreamUnavailable:
    case ErrorCode::kUpstreamRejected:
    case ErrorCode::kTimeout:
    case ErrorCode::kDimensionMismatch:
      return 502;
    default:
      return 500;
  }
}

}  // namespace

HttpReply handle_query_request(const RagPipeline& pipeline, std::string_view body) {
  json doc = json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) return error_reply(400, "body must be a JSON object");
  if (!doc.contains("question") || !doc["question"].is_string())
    return error_reply(400, "'question' must be a string");
  const std::string question = doc["question"].get<std::string>();

  QueryMode mode = QueryMode::kRag;
  if (doc.contains("mode")) {
    if (!doc["mode"].is_string()) return error_reply(400, "'mode' must be a string");
    const auto name = doc["mode"].get<std::string>();
    if (name != "rag" && name != "baseline")
      return error_reply(400, "'mode' must be 'rag' or 'baseline'");
    mode = parse_mode(name);
  }
  std::size_t k = pipeline.options().k;
  if (doc.contains("k")) {
    if (!doc["k"].is_number_integer() || doc["k"].get<long long>() < 1)
      return error_reply(400, "'k' must be a positive integer");
    k = doc["k"].get<std::size_t>();
  }

  try {
    return {200, query_result_to_json(pipeline.answer_query(question, mode, k))};
  } catch (const Error& e) {
    return error_reply(status_for(e.code()), e.what());
  } catch (const std::exception& e) {
    return error_reply(500, e.what());
  }
}

HttpReply handle_health_request(const Corpus* corpus) {
  json doc = {{"status", "ok"},
              {"index_count", corpus ? corpus->index.count() : 0},
              {"dim", corpus ? corpus->index.dim() : 0}};
  return {200, doc.dump()};
}

std::pair<std::string, int> parse_bind_address(std::string_view bind) {
  auto colon = bind.rfind(':');
  if (colon == std::string_view::npos || colon == 0)
    fail(ErrorCode::kConfig, "bind address must be host:port, got '" + std::string(bind) + "'");
  int port = -1;
  auto digits = bind.substr(colon + 1);
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), port);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || port < 0 || port > 65535)
    fail(ErrorCode::kConfig, "invalid port in bind address '" + std::string(bind) + "'");
  return {std::string(bind.substr(0, colon)), port};
}

QueryService::QueryService(std::shared_ptr<const RagPipeline> pipeline,
                           std::shared_ptr<const Corpus> corpus)
    : pipeline_(std::move(pipeline)),
      corpus_(std::move(corpus)),
      server_(std::make_unique<httplib::Server>()) {
  if (!pipeline_) fail(ErrorCode::kConfig, "service needs a pipeline");
  if (!corpus_) fail(ErrorCode::kConfig, "service needs a loaded index");

  // httplib's default also sets SO_REUSEPORT, which would let a second
  // instance share the port silently; a bind conflict must fail instead.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });

  server_->Post("/v1/query", [this](const httplib::Request& req, httplib::Response& res) {
    auto reply = handle_query_request(*pipeline_, req.body);
    res.status = reply.status;
    res.set_content(reply.body, "application/json");
  });
  server_->Get("/v1/health", [this](const httplib::Request&, httplib::Response& res) {
    auto reply = handle_health_request(corpus_.get());
    res.status = reply.status;
    res.set_content(reply.body, "application/json");
  });
}

QueryService::~QueryService() { stop(); }

int QueryService::bind(const std::string& host, int port) {
  if (port == 0) {
    port_ = server_->bind_to_any_port(host);
  } else {
    port_ = server_->bind_to_port(host, port) ? port : -1;
  }
  if (port_ < 0) fail(ErrorCode::kIo, "cannot bind " + host + ":" + std::to_string(port));
  return port_;
}

void QueryService::run() { server_->listen_after_bind(); }

void QueryService::start() {
  thread_ = std::thread([this] { run(); });
  server_->wait_until_ready();
}

void QueryService::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace finrag
