#include "finrag/finrag.h"

#include <cstring>
#include <memory>
#include <span>
#include <string>

#include "core/bench.hpp"
#include "core/embed.hpp"
#include "core/engine.hpp"
#include "core/llmgateway.hpp"
#include "core/service.hpp"
#include "core/vecstore.hpp"

struct finrag_engine {
  finrag::Engine engine;
};

struct finrag_index {
  finrag::FlatIndex index;
};

struct finrag_service {
  std::unique_ptr<finrag::QueryService> service;
};

namespace {

thread_local std::string g_last_error;

finrag_status to_status(finrag::ErrorCode code) { return static_cast<finrag_status>(code); }

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

finrag_status invalid(const char* message) {
  g_last_error = message;
  return FINRAG_ERR_INVALID_ARGUMENT;
}

// Runs `body`, translating exceptions into status codes and the thread's
// last-error message.
template <typename F>
finrag_status guarded(F&& body) {
  g_last_error.clear();
  try {
    return body();
  } catch (const finrag::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return FINRAG_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return FINRAG_ERR_INTERNAL;
  }
}

}  // namespace

extern "C" {

const char* finrag_version(void) { return "1.0.0"; }

const char* finrag_status_name(finrag_status status) {
  static thread_local std::string name;
  name = std::string(finrag::error_code_name(static_cast<finrag::ErrorCode>(status)));
  return name.c_str();
}

const char* finrag_last_error(void) { return g_last_error.c_str(); }

void finrag_string_free(char* s) { std::free(s); }

finrag_status finrag_ingest(const char* dataset_path, const char* format,
                            const char* output_path, char** report_json) {
  if (!dataset_path || !output_path) return invalid("dataset_path and output_path are required");
  return guarded([&] {
    std::optional<finrag::DatasetFormat> fmt;
    if (format) fmt = finrag::format_from_name(format);
    auto outcome = finrag::ingest_file(dataset_path, fmt, output_path);
    if (report_json) *report_json = dup_string(finrag::ingest_outcome_to_json(outcome));
    if (outcome.load_report.rows_rejected > 0) {
      g_last_error = std::to_string(outcome.load_report.rows_rejected) + " row(s) rejected";
      return FINRAG_PARTIAL_INGEST;
    }
    return FINRAG_OK;
  });
}

finrag_status finrag_engine_create(const char* config_path, const char* overrides_json,
                                   finrag_engine** out) {
  if (!out) return invalid("out is required");
  *out = nullptr;
  return guarded([&] {
    nlohmann::json overrides;
    if (overrides_json) {
      overrides = nlohmann::json::parse(overrides_json, nullptr, false);
      if (overrides.is_discarded())
        finrag::fail(finrag::ErrorCode::kConfig, "overrides are not valid JSON");
    }
    std::optional<std::string> path;
    if (config_path) path = config_path;
    auto config = finrag::resolve_config(path, finrag::process_environment(), overrides);
    *out = new finrag_engine{finrag::Engine(std::move(config))};
    return FINRAG_OK;
  });
}

void finrag_engine_destroy(finrag_engine* engine) { delete engine; }

finrag_status finrag_engine_config(const finrag_engine* engine, char** config_json) {
  if (!engine || !config_json) return invalid("engine and config_json are required");
  return guarded([&] {
    *config_json = dup_string(finrag::config_to_json(engine->engine.config()).dump());
    return FINRAG_OK;
  });
}

finrag_status finrag_engine_build_index(finrag_engine* engine, const char* records_path,
                                        const char* index_path, uint64_t* indexed_count) {
  if (!engine || !records_path || !index_path) return invalid("engine and paths are required");
  return guarded([&] {
    const auto count = engine->engine.build_index(records_path, index_path);
    if (indexed_count) *indexed_count = count;
    return FINRAG_OK;
  });
}

finrag_status finrag_engine_open_index(finrag_engine* engine, const char* index_path) {
  if (!engine || !index_path) return invalid("engine and index_path are required");
  return guarded([&] {
    engine->engine.open_index(index_path);
    return FINRAG_OK;
  });
}

finrag_status finrag_engine_query(const finrag_engine* engine, const char* question,
                                  const char* mode, uint32_t k, char** result_json) {
  if (!engine || !question || !result_json) return invalid("engine, question and result_json are required");
  return guarded([&] {
    const auto m = finrag::parse_mode(mode ? mode : "rag");
    auto result = engine->engine.query(question, m, k);
    *result_json = dup_string(finrag::query_result_to_json(result));
    return FINRAG_OK;
  });
}

finrag_status finrag_engine_eval(const finrag_engine* engine, const char* records_path,
                                 uint32_t n, uint64_t seed, const char* groups,
                                 char** report_json, char** table_text) {
  if (!engine || !records_path || !report_json) return invalid("engine, records_path and report_json are required");
  return guarded([&] {
    auto report = engine->engine.eval(records_path, n, seed, groups ? groups : "BG,REG,VUG,FOG");
    *report_json = dup_string(finrag::eval_report_to_json(report));
    if (table_text) *table_text = dup_string(finrag::eval_report_to_table(report));
    return FINRAG_OK;
  });
}

finrag_status finrag_service_start(const finrag_engine* engine, const char* bind,
                                   finrag_service** out) {
  if (!engine || !bind || !out) return invalid("engine, bind and out are required");
  *out = nullptr;
  return guarded([&] {
    auto [host, port] = finrag::parse_bind_address(bind);
    auto service = std::make_unique<finrag::QueryService>(engine->engine.pipeline(),
                                                          engine->engine.corpus());
    service->bind(host, port);
    service->start();
    *out = new finrag_service{std::move(service)};
    return FINRAG_OK;
  });
}

int finrag_service_port(const finrag_service* service) {
  return service ? service->service->port() : -1;
}

void finrag_service_stop(finrag_service* service) {
  if (!service) return;
  service->service->stop();
  delete service;
}

finrag_status finrag_index_create(uint32_t dim, finrag_index** out) {
  if (!out) return invalid("out is required");
  *out = nullptr;
  return guarded([&] {
    *out = new finrag_index{finrag::FlatIndex(dim)};
    return FINRAG_OK;
  });
}

finrag_status finrag_index_load(const char* path, finrag_index** out) {
  if (!path || !out) return invalid("path and out are required");
  *out = nullptr;
  return guarded([&] {
    *out = new finrag_index{finrag::FlatIndex::load_file(path)};
    return FINRAG_OK;
  });
}

void finrag_index_destroy(finrag_index* index) { delete index; }

uint32_t finrag_index_dim(const finrag_index* index) {
  return index ? static_cast<uint32_t>(index->index.dim()) : 0;
}

uint64_t finrag_index_count(const finrag_index* index) {
  return index ? index->index.count() : 0;
}

const char* finrag_index_id(const finrag_index* index, uint64_t position) {
  if (!index || position >= index->index.count()) return nullptr;
  return index->index.ids()[position].c_str();
}

finrag_status finrag_index_add(finrag_index* index, const char* id, const float* vector,
                               uint32_t dim) {
  if (!index || !id || !vector) return invalid("index, id and vector are required");
  return guarded([&] {
    index->index.add(id, std::span<const float>(vector, dim));
    return FINRAG_OK;
  });
}

finrag_status finrag_index_search(const finrag_index* index, const float* query, uint32_t dim,
                                  uint32_t k, finrag_hit* hits, size_t* hit_count) {
  if (!index || !query || !hits || !hit_count) return invalid("index, query, hits and hit_count are required");
  return guarded([&] {
    auto result = index->index.search(std::span<const float>(query, dim), k);
    for (std::size_t i = 0; i < result.size(); ++i)
      hits[i] = {result[i].position, result[i].score, static_cast<uint32_t>(result[i].rank)};
    *hit_count = result.size();
    return FINRAG_OK;
  });
}

finrag_status finrag_index_save(const finrag_index* index, const char* path) {
  if (!index || !path) return invalid("index and path are required");
  return guarded([&] {
    index->index.save_file(path);
    return FINRAG_OK;
  });
}

finrag_status finrag_hash_embed(const char* text, uint32_t dim, float* out) {
  if (!text || !out) return invalid("text and out are required");
  return guarded([&] {
    auto v = finrag::hash_embed(text, dim);
    std::memcpy(out, v.vector.values.data(), sizeof(float) * dim);
    return FINRAG_OK;
  });
}

uint64_t finrag_estimate_tokens(const char* text) {
  return text ? finrag::estimate_tokens(text) : 0;
}

finrag_status finrag_bench_search(uint64_t n, uint32_t dim, uint32_t queries, uint32_t k,
                                  uint64_t seed, char** result_json) {
  if (!result_json) return invalid("result_json is required");
  return guarded([&] {
    auto r = finrag::bench_search(n, dim, queries, k, seed);
    *result_json = dup_string(finrag::bench_result_to_json(r));
    return FINRAG_OK;
  });
}

}  // extern "C"
