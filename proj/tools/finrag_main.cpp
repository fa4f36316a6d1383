// Command-line front end over the finrag C API.

#include <csignal>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "finrag/finrag.h"
#include "json.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 2;
constexpr int kExitPartial = 3;

struct StringDeleter {
  void operator()(char* s) const { finrag_string_free(s); }
};
using OwnedString = std::unique_ptr<char, StringDeleter>;

struct EngineDeleter {
  void operator()(finrag_engine* e) const { finrag_engine_destroy(e); }
};
using EnginePtr = std::unique_ptr<finrag_engine, EngineDeleter>;

int report_failure(const char* what, finrag_status status) {
  std::cerr << "finrag " << what << ": " << finrag_status_name(status) << ": "
            << finrag_last_error() << "\n";
  return kExitFailure;
}

struct GlobalOptions {
  std::string config_path;
  std::string completer;
  std::string embedder;
  int dim = 0;
};

EnginePtr make_engine(const GlobalOptions& g, const nlohmann::json& extra, finrag_status& status) {
  nlohmann::json overrides = extra.is_null() ? nlohmann::json::object() : extra;
  if (!g.completer.empty()) overrides["completer"] = g.completer;
  if (!g.embedder.empty()) overrides["embedder"]["kind"] = g.embedder;
  if (g.dim > 0) overrides["embedder"]["dim"] = g.dim;
  const std::string text = overrides.dump();
  finrag_engine* raw = nullptr;
  status = finrag_engine_create(g.config_path.empty() ? nullptr : g.config_path.c_str(),
                                text.c_str(), &raw);
  return EnginePtr(raw);
}

std::string effective_index_path(const finrag_engine* engine, const std::string& flag) {
  if (!flag.empty()) return flag;
  char* raw = nullptr;
  if (finrag_engine_config(engine, &raw) != FINRAG_OK) return {};
  OwnedString owned(raw);
  return nlohmann::json::parse(owned.get()).value("index_path", "");
}

int run_query_once(const finrag_engine* engine, const std::string& question,
                   const std::string& mode, std::uint32_t k) {
  char* raw = nullptr;
  const auto status = finrag_engine_query(engine, question.c_str(), mode.c_str(), k, &raw);
  if (status != FINRAG_OK) return report_failure("query", status);
  OwnedString result(raw);
  std::cout << result.get() << std::endl;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Retrieval-augmented question answering over financial fundamentals"};
  app.require_subcommand(1);
  GlobalOptions global;
  app.add_option("--config", global.config_path, "JSON configuration file");
  app.add_option("--completer", global.completer, "Answer generator: remote or scripted")
      ->check(CLI::IsMember({"remote", "scripted"}));
  app.add_option("--embedder", global.embedder, "Embedder: local-hash or remote")
      ->check(CLI::IsMember({"local-hash", "remote"}));
  app.add_option("--dim", global.dim, "Embedding dimension")->check(CLI::PositiveNumber);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Normalize a dataset into canonical JSON-lines records");
  std::string dataset_path, output_path, format;
  ingest->add_option("--dataset", dataset_path, "Input dataset (.jsonl, .json or .csv)")->required();
  ingest->add_option("--output", output_path, "Canonical records output (.jsonl)")->required();
  ingest->add_option("--format", format, "json-lines, json-array or csv (default: by extension)");

  // index
  auto* index = app.add_subcommand("index", "Build passages and the vector index from records");
  std::string records_path, index_path;
  index->add_option("--records", records_path, "Canonical records file")->required();
  index->add_option("--index", index_path, "Index output path");

  // query
  auto* query = app.add_subcommand("query", "Answer a question");
  std::string question, mode = "rag";
  std::uint32_t k = 0;
  bool repl = false;
  query->add_option("question,--question", question, "Question text");
  query->add_option("--mode", mode, "rag or baseline")->check(CLI::IsMember({"rag", "baseline"}));
  query->add_option("--k", k, "Passages to retrieve (default from config)");
  query->add_option("--index", index_path, "Index path");
  query->add_flag("--repl", repl, "Read one question per line from stdin");

  // eval
  auto* eval = app.add_subcommand("eval", "Run the evaluation groups over a synthesized QA set");
  std::uint32_t n = 50;
  std::uint64_t seed = 0;
  std::string groups = "BG,REG,VUG,FOG";
  std::string out_dir = ".";
  eval->add_option("--records", records_path, "Canonical records file")->required();
  eval->add_option("--index", index_path, "Index path");
  eval->add_option("--n", n, "Number of QA items")->check(CLI::PositiveNumber);
  eval->add_option("--seed", seed, "Sampling seed");
  eval->add_option("--groups", groups, "Comma-separated groups: BG,REG,VUG,FOG,custom:<model>[+rag]");
  eval->add_option("--out", out_dir, "Directory for report.json and report.txt");

  // serve
  auto* serve = app.add_subcommand("serve", "Serve POST /v1/query and GET /v1/health");
  std::string bind;
  serve->add_option("--bind", bind, "host:port (default from config)");
  serve->add_option("--index", index_path, "Index path");

  // bench
  auto* bench = app.add_subcommand("bench", "Time single-threaded exact top-k search");
  std::uint64_t bench_n = 100000;
  std::uint32_t bench_dim = 384, bench_queries = 20, bench_k = 5;
  std::uint64_t bench_seed = 1;
  double threshold_ms = 0.0;
  bench->add_option("--n", bench_n, "Stored vectors");
  bench->add_option("--dim", bench_dim, "Vector dimension");
  bench->add_option("--queries", bench_queries, "Queries to time");
  bench->add_option("--k", bench_k, "Top-k");
  bench->add_option("--seed", bench_seed, "Random seed");
  bench->add_option("--max-ms", threshold_ms, "Fail if p95 latency exceeds this many ms");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints help or the usage error
    return code == 0 ? kExitOk : kExitFailure;
  }

  if (ingest->parsed()) {
    char* raw = nullptr;
    const auto status = finrag_ingest(dataset_path.c_str(), format.empty() ? nullptr : format.c_str(),
                                      output_path.c_str(), &raw);
    if (status != FINRAG_OK && status != FINRAG_PARTIAL_INGEST) return report_failure("ingest", status);
    OwnedString report(raw);
    std::cout << report.get() << std::endl;
    return status == FINRAG_PARTIAL_INGEST ? kExitPartial : kExitOk;
  }

  if (bench->parsed()) {
    char* raw = nullptr;
    const auto status = finrag_bench_search(bench_n, bench_dim, bench_queries, bench_k, bench_seed, &raw);
    if (status != FINRAG_OK) return report_failure("bench", status);
    OwnedString result(raw);
    std::cout << result.get() << std::endl;
    if (threshold_ms > 0.0) {
      const double p95 = nlohmann::json::parse(result.get()).at("p95_ms").get<double>();
      if (p95 > threshold_ms) {
        std::cerr << "finrag bench: p95 " << p95 << " ms exceeds " << threshold_ms << " ms\n";
        return kExitFailure;
      }
    }
    return kExitOk;
  }

  finrag_status status = FINRAG_OK;
  nlohmann::json extra = nlohmann::json::object();
  if (serve->parsed() && !bind.empty()) extra["bind"] = bind;
  EnginePtr engine = make_engine(global, extra, status);
  if (status != FINRAG_OK) return report_failure("configuration", status);

  if (index->parsed()) {
    const std::string path = effective_index_path(engine.get(), index_path);
    std::uint64_t count = 0;
    status = finrag_engine_build_index(engine.get(), records_path.c_str(), path.c_str(), &count);
    if (status != FINRAG_OK) return report_failure("index", status);
    std::cout << "indexed " << count << " passages" << std::endl;
    return kExitOk;
  }

  const bool needs_index = eval->parsed() || serve->parsed() || (query->parsed() && mode == "rag");
  if (needs_index) {
    const std::string path = effective_index_path(engine.get(), index_path);
    status = finrag_engine_open_index(engine.get(), path.c_str());
    if (status != FINRAG_OK) return report_failure("open index", status);
  }

  if (query->parsed()) {
    if (!repl) {
      if (question.empty()) {
        std::cerr << "finrag query: a question is required (or use --repl)\n";
        return kExitFailure;
      }
      return run_query_once(engine.get(), question, mode, k);
    }
    int exit_code = kExitOk;
    std::string line;
    while (std::getline(std::cin, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      if (run_query_once(engine.get(), line, mode, k) != kExitOk) exit_code = kExitFailure;
    }
    return exit_code;
  }

  if (eval->parsed()) {
    char* report_raw = nullptr;
    char* table_raw = nullptr;
    status = finrag_engine_eval(engine.get(), records_path.c_str(), n, seed, groups.c_str(),
                                &report_raw, &table_raw);
    if (status != FINRAG_OK) return report_failure("eval", status);
    OwnedString report(report_raw), table(table_raw);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    const auto dir = std::filesystem::path(out_dir);
    std::ofstream(dir / "report.json") << report.get();
    std::ofstream(dir / "report.txt") << table.get();
    if (!std::filesystem::exists(dir / "report.json")) {
      std::cerr << "finrag eval: cannot write reports to " << out_dir << "\n";
      return kExitFailure;
    }
    std::cout << table.get();
    return kExitOk;
  }

  if (serve->parsed()) {
    char* config_raw = nullptr;
    finrag_engine_config(engine.get(), &config_raw);
    OwnedString config(config_raw);
    const std::string bind_address = nlohmann::json::parse(config.get()).value("bind", "");

    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    finrag_service* service = nullptr;
    status = finrag_service_start(engine.get(), bind_address.c_str(), &service);
    if (status != FINRAG_OK) return report_failure("serve", status);
    const auto host = bind_address.substr(0, bind_address.rfind(':'));
    std::cout << "listening on " << host << ":" << finrag_service_port(service) << std::endl;
    int sig = 0;
    sigwait(&signals, &sig);
    finrag_service_stop(service);
    return kExitOk;
  }
  return kExitOk;
}
