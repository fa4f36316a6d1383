#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "core/config.hpp"
#include "core/evalbench.hpp"
#include "core/ingest.hpp"
#include "core/ragpipe.hpp"

namespace finrag {

std::string passages_path_for(const std::string& index_path);

struct IngestOutcome {
  NormalizationReport load_report;
  NormalizationReport clean_report;
  std::size_t records_written = 0;
  std::string report_path;
};

// Loads, cleans and writes canonical JSON-lines records to `output_path`
// plus a report at "<output_path>.report.json".
IngestOutcome ingest_file(const std::string& dataset_path, std::optional<DatasetFormat> format,
                          const std::string& output_path);

std::string ingest_outcome_to_json(const IngestOutcome& outcome);

std::vector<FinRecord> read_records(const std::string& path);

/// Wires configuration to embedders, completers, the loaded corpus and the
/// query pipeline.
class Engine {
 public:
  explicit Engine(AppConfig config);

  const AppConfig& config() const { return config_; }

  std::size_t build_index(const std::string& records_path, const std::string& index_path);
  void open_index(const std::string& index_path);
  void set_corpus(std::shared_ptr<const Corpus> corpus);
  std::shared_ptr<const Corpus> corpus() const { return corpus_; }

  std::shared_ptr<const Embedder> embedder() const { return embedder_; }
  std::shared_ptr<const Completer> completer_for(const ModelProfile& model) const;

  // Pipeline for the base model over the open corpus.
  std::shared_ptr<const RagPipeline> pipeline() const;

  QueryResult query(std::string_view question, QueryMode mode, std::size_t k) const;

  EvalReport eval(const std::string& records_path, std::size_t n, std::uint64_t seed,
                  const std::string& groups) const;

 private:
  void rebuild_pipeline();

  AppConfig config_;
  std::shared_ptr<const Embedder> embedder_;
  std::shared_ptr<const Corpus> corpus_;
  std::shared_ptr<const RagPipeline> pipeline_;
};

}  // namespace finrag
