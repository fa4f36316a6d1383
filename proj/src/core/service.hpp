#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <thread>

#include "core/ragpipe.hpp"

namespace httplib {
class Server;
}

namespace finrag {

struct HttpReply {
  int status = 200;
  std::string body;  // JSON
};

// Request handling without sockets; the server routes map straight onto these.
HttpReply handle_query_request(const RagPipeline& pipeline, std::string_view body);
HttpReply handle_health_request(const Corpus* corpus);

// "host:port" -> parts; port 0 picks a free port.
std::pair<std::string, int> parse_bind_address(std::string_view bind);

/// POST /v1/query and GET /v1/health over a read-only corpus.
class QueryService {
 public:
  QueryService(std::shared_ptr<const RagPipeline> pipeline, std::shared_ptr<const Corpus> corpus);
  ~QueryService();

  QueryService(const QueryService&) = delete;
  QueryService& operator=(const QueryService&) = delete;

  // Binds or throws; returns the bound port.
  int bind(const std::string& host, int port);
  void run();  // blocks until stop()
  void start();  // run() on a background thread
  void stop();
  int port() const { return port_; }

 private:
  std::shared_ptr<const RagPipeline> pipeline_;
  std::shared_ptr<const Corpus> corpus_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace finrag
