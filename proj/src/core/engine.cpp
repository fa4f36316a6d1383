#include "core/engine.hpp"

#include <filesystem>
#include <fstream>

#include "core/docbuild.hpp"
#include "json.hpp"

namespace finrag {
namespace {

void write_atomically(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::kIo, "cannot write '" + tmp + "'");
    out << contents;
    out.flush();
    if (!out) fail(ErrorCode::kIo, "cannot write '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    fail(ErrorCode::kIo, "cannot rename '" + tmp + "': " + ec.message());
  }
}

}  // namespace

std::string passages_path_for(const std::string& index_path) {
  return index_path + ".passages.jsonl";
}

IngestOutcome ingest_file(const std::string& dataset_path, std::optional<DatasetFormat> format,
                          const std::string& output_path) {
  const DatasetFormat fmt = format ? *format : format_from_path(dataset_path);
  auto loaded = load_dataset_file(dataset_path, fmt);
  auto cleaned = clean_dataset(std::move(loaded.records));

  IngestOutcome outcome;
  outcome.load_report = std::move(loaded.report);
  outcome.clean_report = std::move(cleaned.report);
  outcome.records_written = cleaned.records.size();
  outcome.report_path = output_path + ".report.json";

  std::string lines;
  for (const auto& r : cleaned.records) lines += record_to_json_line(r) + "\n";
  write_atomically(output_path, lines);
  write_atomically(outcome.report_path, ingest_outcome_to_json(outcome) + "\n");
  return outcome;
}

std::string ingest_outcome_to_json(const IngestOutcome& o) {
  using nlohmann::json;
  json doc = {{"rows_read", o.load_report.rows_read},
              {"rows_accepted", o.load_report.rows_accepted},
              {"rows_rejected", o.load_report.rows_rejected},
              {"duplicates_dropped", o.clean_report.duplicates_dropped},
              {"outliers_flagged", o.clean_report.outliers_flagged},
              {"records_written", o.records_written},
              {"rejects", json::parse(report_to_json(o.load_report))["rejects"]}};
  return doc.dump();
}

std::vector<FinRecord> read_records(const std::string& path) {
  DatasetFormat fmt = DatasetFormat::kJsonLines;
  try {
    fmt = format_from_path(path);
  } catch (const Error&) {
  }
  auto loaded = load_dataset_file(path, fmt);
  if (loaded.report.rows_rejected > 0) {
    const auto& r = loaded.report.rejects.front();
    fail(ErrorCode::kInvalidArgument, "records file '" + path + "' has " +
                                          std::to_string(loaded.report.rows_rejected) +
                                          " invalid rows (first: row " + std::to_string(r.row) +
                                          ", " + r.code + "); run ingest first");
  }
  return std::move(loaded.records);
}

Engine::Engine(AppConfig config) : config_(std::move(config)) {
  config_.validate();
  const std::string& key = config_.embed_api_key;
  embedder_ = make_embedder(config_.embedder, key);
  rebuild_pipeline();
}

void Engine::rebuild_pipeline() {
  pipeline_ = std::make_shared<const RagPipeline>(
      corpus_, embedder_, completer_for(config_.base_model),
      PipelineOptions{config_.k, config_.context_budget});
}

std::size_t Engine::build_index(const std::string& records_path, const std::string& index_path) {
  auto cleaned = clean_dataset(read_records(records_path));
  auto passages = build_passages(cleaned.records);

  FlatIndex index(embedder_->dim());
  if (!passages.empty()) {
    std::vector<std::string> texts;
    texts.reserve(passages.size());
    for (const auto& p : passages) texts.push_back(p.text);
    auto vectors = embedder_->embed_texts(texts);
    for (std::size_t i = 0; i < passages.size(); ++i) index.add(passages[i].id, vectors[i].values);
  }

  std::string lines;
  for (const auto& p : passages) lines += passage_to_json_line(p) + "\n";
  // Passages first: an index file on disk always has its passages beside it.
  write_atomically(passages_path_for(index_path), lines);
  index.save_file(index_path);
  return index.count();
}

void Engine::open_index(const std::string& index_path) {
  FlatIndex index = FlatIndex::load_file(index_path);
  if (index.dim() != embedder_->dim())
    fail(ErrorCode::kDimensionMismatch, "index dim " + std::to_string(index.dim()) +
                                            " does not match embedder dim " +
                                            std::to_string(embedder_->dim()));
  std::ifstream in(passages_path_for(index_path));
  if (!in) fail(ErrorCode::kIo, "cannot open '" + passages_path_for(index_path) + "'");
  set_corpus(std::make_shared<const Corpus>(std::move(index), read_passages(in)));
}

void Engine::set_corpus(std::shared_ptr<const Corpus> corpus) {
  corpus_ = std::move(corpus);
  rebuild_pipeline();
}

std::shared_ptr<const Completer> Engine::completer_for(const ModelProfile& model) const {
  if (config_.completer == CompleterKind::kScripted)
    return std::make_shared<ScriptedCompleter>(model.name);
  return std::make_shared<RemoteCompleter>(model, config_.llm_api_key);
}

std::shared_ptr<const RagPipeline> Engine::pipeline() const { return pipeline_; }

QueryResult Engine::query(std::string_view question, QueryMode mode, std::size_t k) const {
  return pipeline()->answer_query(question, mode, k == 0 ? config_.k : k);
}

EvalReport Engine::eval(const std::string& records_path, std::size_t n, std::uint64_t seed,
                        const std::string& groups) const {
  auto group_configs = parse_groups(groups, config_.base_model, config_.enhanced_model);
  auto items = synthesize_qa(clean_dataset(read_records(records_path)).records, n, seed);
  EvalOptions options;
  options.pipeline = {config_.k, config_.context_budget};
  options.seed = seed;
  options.max_in_flight = config_.max_in_flight;
  return run_groups(group_configs, items, corpus_, embedder_,
                    [this](const GroupConfig& g) { return completer_for(g.model); }, options);
}

}  // namespace finrag
