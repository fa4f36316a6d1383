// Exercises the shared library exactly as an external C consumer would.
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "finrag/finrag.h"
#include "httplib.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string take(char* s) {
  std::string out = s ? s : "";
  finrag_string_free(s);
  return out;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

const char* kQuestion = "What was Apple Inc.'s Revenue for the quarter ending 2023-03-31?";

}  // namespace

TEST_CASE("status names and version") {
  CHECK(std::string(finrag_version()) == "1.0.0");
  CHECK(std::string(finrag_status_name(FINRAG_OK)) == "Ok");
  CHECK(std::string(finrag_status_name(FINRAG_ERR_CORRUPT_INDEX)) == "CorruptIndex");
  CHECK(std::string(finrag_status_name(FINRAG_PARTIAL_INGEST)) == "PartialIngest");
}

TEST_CASE("null arguments are rejected, not dereferenced") {
  finrag_index* index = nullptr;
  CHECK(finrag_index_create(4, nullptr) == FINRAG_ERR_INVALID_ARGUMENT);
  CHECK(finrag_index_load(nullptr, &index) == FINRAG_ERR_INVALID_ARGUMENT);
  CHECK(std::strlen(finrag_last_error()) > 0);
  CHECK(finrag_hash_embed(nullptr, 8, nullptr) == FINRAG_ERR_INVALID_ARGUMENT);
  finrag_index_destroy(nullptr);
  finrag_engine_destroy(nullptr);
  finrag_service_stop(nullptr);
  finrag_string_free(nullptr);
}

TEST_CASE("index lifecycle through the C API") {
  TempDir dir("finrag_capi_index");
  finrag_index* index = nullptr;
  REQUIRE(finrag_index_create(3, &index) == FINRAG_OK);
  const float a[3] = {1, 0, 0}, b[3] = {0, 1, 0}, c[3] = {0.6f, 0.8f, 0};
  CHECK(finrag_index_add(index, "a", a, 3) == FINRAG_OK);
  CHECK(finrag_index_add(index, "b", b, 3) == FINRAG_OK);
  CHECK(finrag_index_add(index, "c", c, 3) == FINRAG_OK);
  CHECK(finrag_index_add(index, "a", b, 3) == FINRAG_ERR_DUPLICATE_ID);
  CHECK(std::string(finrag_last_error()).find("duplicate") != std::string::npos);
  CHECK(finrag_index_add(index, "d", b, 2) == FINRAG_ERR_DIMENSION_MISMATCH);
  CHECK(finrag_index_count(index) == 3);
  CHECK(finrag_index_dim(index) == 3);

  finrag_hit hits[5];
  size_t count = 0;
  CHECK(finrag_index_search(index, b, 3, 5, hits, &count) == FINRAG_OK);
  REQUIRE(count == 3);
  CHECK(std::string(finrag_index_id(index, hits[0].position)) == "b");
  CHECK(hits[0].rank == 1);
  CHECK(hits[0].score == 1.0);
  CHECK(std::string(finrag_index_id(index, hits[1].position)) == "c");
  CHECK(finrag_index_id(index, 99) == nullptr);
  CHECK(finrag_index_search(index, b, 3, 0, hits, &count) == FINRAG_ERR_INVALID_ARGUMENT);

  const auto path = dir.file("c.frix");
  CHECK(finrag_index_save(index, path.c_str()) == FINRAG_OK);
  finrag_index* loaded = nullptr;
  REQUIRE(finrag_index_load(path.c_str(), &loaded) == FINRAG_OK);
  CHECK(finrag_index_count(loaded) == 3);
  finrag_hit again[5];
  size_t again_count = 0;
  CHECK(finrag_index_search(loaded, b, 3, 5, again, &again_count) == FINRAG_OK);
  CHECK(again_count == count);
  for (size_t i = 0; i < count; ++i) {
    CHECK(again[i].position == hits[i].position);
    CHECK(again[i].score == hits[i].score);
  }
  finrag_index_destroy(loaded);
  finrag_index_destroy(index);

  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(20);
    f.put('\x7f');
  }
  finrag_index* corrupt = nullptr;
  CHECK(finrag_index_load(path.c_str(), &corrupt) == FINRAG_ERR_CORRUPT_INDEX);
  CHECK(corrupt == nullptr);
  fs::resize_file(path, 10);
  CHECK(finrag_index_load(path.c_str(), &corrupt) == FINRAG_ERR_TRUNCATED_FILE);
}

TEST_CASE("utilities") {
  std::vector<float> v(384);
  CHECK(finrag_hash_embed("revenue rose", 384, v.data()) == FINRAG_OK);
  double norm = 0;
  for (float x : v) norm += double(x) * x;
  CHECK(std::fabs(std::sqrt(norm) - 1.0) <= 1e-6);
  CHECK(finrag_hash_embed("x", 0, v.data()) == FINRAG_ERR_INVALID_ARGUMENT);
  CHECK(finrag_estimate_tokens("abcdefgh") == 2);
  char* bench = nullptr;
  REQUIRE(finrag_bench_search(1000, 16, 10, 5, 1, &bench) == FINRAG_OK);
  auto doc = json::parse(take(bench));
  CHECK(doc.contains("p95_ms"));
}

TEST_CASE("ingest, index, query, eval and serve through the C API") {
  TempDir dir("finrag_capi_engine");
  std::ofstream(dir.file("raw.jsonl"))
      << R"({"period":"2023/3/31","company":"Apple Inc.","tickers":"AAPL","indicator":"Revenue","amount":"100000000"})"
      << "\n"
      << R"({"period":"2023/3/31","company":"Apple Inc.","tickers":"AAPL","indicator":"Assets","amount":""})"
      << "\n";
  char* report = nullptr;
  CHECK(finrag_ingest(dir.file("raw.jsonl").c_str(), nullptr, dir.file("records.jsonl").c_str(),
                      &report) == FINRAG_PARTIAL_INGEST);
  auto report_doc = json::parse(take(report));
  CHECK(report_doc["rows_rejected"] == 1);
  CHECK(report_doc["records_written"] == 1);
  CHECK(finrag_ingest(dir.file("missing.jsonl").c_str(), nullptr, dir.file("x").c_str(),
                      &report) == FINRAG_ERR_UNREADABLE_SOURCE);
  CHECK(finrag_ingest(dir.file("raw.jsonl").c_str(), "yaml", dir.file("x").c_str(), &report) ==
        FINRAG_ERR_UNKNOWN_FORMAT);

  finrag_engine* engine = nullptr;
  CHECK(finrag_engine_create(nullptr, "{\"k\": 0}", &engine) == FINRAG_ERR_CONFIG);
  CHECK(finrag_engine_create(nullptr, "{not json", &engine) == FINRAG_ERR_CONFIG);
  REQUIRE(finrag_engine_create(nullptr, "{\"completer\": \"scripted\"}", &engine) == FINRAG_OK);

  char* config = nullptr;
  REQUIRE(finrag_engine_config(engine, &config) == FINRAG_OK);
  CHECK(json::parse(take(config))["k"] == 5);

  uint64_t indexed = 0;
  const auto index_path = dir.file("idx.frix");
  REQUIRE(finrag_engine_build_index(engine, dir.file("records.jsonl").c_str(), index_path.c_str(),
                                    &indexed) == FINRAG_OK);
  CHECK(indexed == 1);
  REQUIRE(finrag_engine_open_index(engine, index_path.c_str()) == FINRAG_OK);

  char* result = nullptr;
  REQUIRE(finrag_engine_query(engine, kQuestion, "rag", 0, &result) == FINRAG_OK);
  auto doc = json::parse(take(result));
  CHECK(doc["answer"] == "100000000");
  CHECK(doc["retrieved"][0]["id"] == "AAPL:2023-03-31");
  REQUIRE(finrag_engine_query(engine, kQuestion, "baseline", 0, &result) == FINRAG_OK);
  CHECK(json::parse(take(result))["answer"] == "INSUFFICIENT CONTEXT");
  CHECK(finrag_engine_query(engine, "", "rag", 0, &result) == FINRAG_ERR_EMPTY_QUESTION);
  CHECK(finrag_engine_query(engine, kQuestion, "hybrid", 0, &result) ==
        FINRAG_ERR_INVALID_ARGUMENT);

  char* eval_json = nullptr;
  char* table = nullptr;
  REQUIRE(finrag_engine_eval(engine, dir.file("records.jsonl").c_str(), 1, 3, "BG,REG", &eval_json,
                             &table) == FINRAG_OK);
  auto eval_doc = json::parse(take(eval_json));
  CHECK(eval_doc["groups"][0]["accuracy"] == 0.0);
  CHECK(eval_doc["groups"][1]["accuracy"] == 1.0);
  CHECK(take(table).find("REG") != std::string::npos);
  CHECK(finrag_engine_eval(engine, dir.file("records.jsonl").c_str(), 2, 3, "BG", &eval_json,
                           nullptr) == FINRAG_ERR_INSUFFICIENT_FACTS);
  CHECK(finrag_engine_eval(engine, dir.file("records.jsonl").c_str(), 1, 3, "ZZ", &eval_json,
                           nullptr) == FINRAG_ERR_UNKNOWN_GROUP);

  finrag_service* service = nullptr;
  REQUIRE(finrag_service_start(engine, "127.0.0.1:0", &service) == FINRAG_OK);
  const int port = finrag_service_port(service);
  CHECK(port > 0);
  httplib::Client client("127.0.0.1", port);
  auto health = client.Get("/v1/health");
  REQUIRE(health);
  CHECK(json::parse(health->body)["index_count"] == 1);
  auto answer = client.Post("/v1/query", json{{"question", kQuestion}}.dump(), "application/json");
  REQUIRE(answer);
  CHECK(answer->status == 200);
  CHECK(json::parse(answer->body)["answer"] == "100000000");
  finrag_service_stop(service);

  finrag_engine_destroy(engine);
}
