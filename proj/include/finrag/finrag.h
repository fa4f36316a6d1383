/*
 * finrag C API.
 *
 * Every function returns a finrag_status. On failure a message describing the
 * error is available from finrag_last_error() on the calling thread until the
 * next API call on that thread. Strings returned through char** out
 * parameters are owned by the caller and released with finrag_string_free().
 */
#ifndef FINRAG_FINRAG_H_
#define FINRAG_FINRAG_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define FINRAG_API __declspec(dllexport)
#else
#define FINRAG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum finrag_status {
  FINRAG_OK = 0,
  FINRAG_ERR_INVALID_ARGUMENT = 1,
  FINRAG_ERR_MISSING_VALUE = 2,
  FINRAG_ERR_MALFORMED_NUMBER = 3,
  FINRAG_ERR_INVALID_DATE = 4,
  FINRAG_ERR_AMBIGUOUS_DATE = 5,
  FINRAG_ERR_MISSING_FIELD = 6,
  FINRAG_ERR_UNREADABLE_SOURCE = 7,
  FINRAG_ERR_UNKNOWN_FORMAT = 8,
  /* Ingest finished but some rows were rejected; outputs were written. */
  FINRAG_PARTIAL_INGEST = 9,
  FINRAG_ERR_CONFLICTING_COMPANY_NAME = 10,
  FINRAG_ERR_EMPTY_TEXT = 11,
  FINRAG_ERR_EMBEDDER_UNAVAILABLE = 12,
  FINRAG_ERR_DIMENSION_MISMATCH = 13,
  FINRAG_ERR_DUPLICATE_ID = 14,
  FINRAG_ERR_CORRUPT_INDEX = 15,
  FINRAG_ERR_TRUNCATED_FILE = 16,
  FINRAG_ERR_UPSTREAM_UNAVAILABLE = 17,
  FINRAG_ERR_UPSTREAM_REJECTED = 18,
  FINRAG_ERR_TIMEOUT = 19,
  FINRAG_ERR_EMPTY_QUESTION = 20,
  FINRAG_ERR_INSUFFICIENT_FACTS = 21,
  FINRAG_ERR_LENGTH_MISMATCH = 22,
  FINRAG_ERR_UNKNOWN_GROUP = 23,
  FINRAG_ERR_CONFIG = 24,
  FINRAG_ERR_IO = 25,
  FINRAG_ERR_INTERNAL = 26
} finrag_status;

typedef struct finrag_engine finrag_engine;
typedef struct finrag_index finrag_index;
typedef struct finrag_service finrag_service;

typedef struct finrag_hit {
  uint64_t position; /* insertion position; see finrag_index_id */
  double score;
  uint32_t rank; /* 1-based */
} finrag_hit;

FINRAG_API const char* finrag_version(void);
FINRAG_API const char* finrag_status_name(finrag_status status);
FINRAG_API const char* finrag_last_error(void);
FINRAG_API void finrag_string_free(char* s);

/* ---- ingest ------------------------------------------------------------ */

/* format: "json-lines", "json-array", "csv", or NULL to infer from the
 * extension. Writes canonical JSON-lines to output_path and the report to
 * "<output_path>.report.json". Returns FINRAG_PARTIAL_INGEST when rows were
 * rejected. report_json may be NULL. */
FINRAG_API finrag_status finrag_ingest(const char* dataset_path, const char* format,
                                       const char* output_path, char** report_json);

/* ---- engine ------------------------------------------------------------ */

/* config_path and overrides_json may be NULL. Overrides use the config file
 * schema and take precedence over the environment, which takes precedence
 * over the file. */
FINRAG_API finrag_status finrag_engine_create(const char* config_path,
                                              const char* overrides_json,
                                              finrag_engine** out);
FINRAG_API void finrag_engine_destroy(finrag_engine* engine);

/* Effective configuration with credentials omitted. */
FINRAG_API finrag_status finrag_engine_config(const finrag_engine* engine, char** config_json);

FINRAG_API finrag_status finrag_engine_build_index(finrag_engine* engine,
                                                   const char* records_path,
                                                   const char* index_path,
                                                   uint64_t* indexed_count);
FINRAG_API finrag_status finrag_engine_open_index(finrag_engine* engine,
                                                  const char* index_path);

/* mode: "rag" or "baseline"; k = 0 uses the configured default. */
FINRAG_API finrag_status finrag_engine_query(const finrag_engine* engine, const char* question,
                                             const char* mode, uint32_t k, char** result_json);

/* groups: comma-separated, e.g. "BG,REG,VUG,FOG". table_text may be NULL. */
FINRAG_API finrag_status finrag_engine_eval(const finrag_engine* engine,
                                            const char* records_path, uint32_t n,
                                            uint64_t seed, const char* groups,
                                            char** report_json, char** table_text);

/* ---- service ----------------------------------------------------------- */

/* bind: "host:port"; port 0 picks a free port. The engine must have an open
 * index and must outlive the service. */
FINRAG_API finrag_status finrag_service_start(const finrag_engine* engine, const char* bind,
                                              finrag_service** out);
FINRAG_API int finrag_service_port(const finrag_service* service);
FINRAG_API void finrag_service_stop(finrag_service* service);

/* ---- vector index ------------------------------------------------------ */

FINRAG_API finrag_status finrag_index_create(uint32_t dim, finrag_index** out);
FINRAG_API finrag_status finrag_index_load(const char* path, finrag_index** out);
FINRAG_API void finrag_index_destroy(finrag_index* index);
FINRAG_API uint32_t finrag_index_dim(const finrag_index* index);
FINRAG_API uint64_t finrag_index_count(const finrag_index* index);
/* NULL when position is out of range. Valid until the index is modified. */
FINRAG_API const char* finrag_index_id(const finrag_index* index, uint64_t position);
FINRAG_API finrag_status finrag_index_add(finrag_index* index, const char* id,
                                          const float* vector, uint32_t dim);
/* hits must have room for k entries; *hit_count receives min(k, count). */
FINRAG_API finrag_status finrag_index_search(const finrag_index* index, const float* query,
                                             uint32_t dim, uint32_t k, finrag_hit* hits,
                                             size_t* hit_count);
FINRAG_API finrag_status finrag_index_save(const finrag_index* index, const char* path);

/* ---- embedding and utilities -------------------------------------------- */

/* Deterministic feature-hashing embedding; out must hold dim floats. */
FINRAG_API finrag_status finrag_hash_embed(const char* text, uint32_t dim, float* out);
FINRAG_API uint64_t finrag_estimate_tokens(const char* text);

/* Times single-threaded exact top-k search over n random dim-dimensional
 * vectors; reports per-query latency statistics as JSON. */
FINRAG_API finrag_status finrag_bench_search(uint64_t n, uint32_t dim, uint32_t queries,
                                             uint32_t k, uint64_t seed, char** result_json);

#ifdef __cplusplus
}
#endif

#endif /* FINRAG_FINRAG_H_ */
