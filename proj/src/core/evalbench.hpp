#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "core/docbuild.hpp"
#include "core/ingest.hpp"
#include "core/llmgateway.hpp"
#include "core/ragpipe.hpp"

namespace finrag {

struct QAItem {
  std::string id;
  std::string question;
  double gold_answer = 0.0;
  std::vector<Fact> gold_facts;
  std::string gold_passage_id;
  std::string company;
  std::string ticker;
  Date period;
  std::string indicator;
};

std::string question_for(std::string_view company, std::string_view indicator,
                         const Date& period);

// Samples n distinct (ticker, period, indicator) facts; same seed, same items.
std::vector<QAItem> synthesize_qa(const std::vector<FinRecord>& records, std::size_t n,
                                  std::uint64_t seed);

// Numeric literals in `answer`, with thousand/million/billion/trillion
// suffixes applied and accounting parentheses read as negative.
std::vector<double> extract_numbers(std::string_view answer);

bool judge_answer(std::string_view answer, double gold);

struct GroupConfig {
  std::string name;
  ModelProfile model;
  bool rag = false;
};

// BG, REG, VUG, FOG in that order.
std::vector<GroupConfig> standard_groups(const ModelProfile& base, const ModelProfile& enhanced);

// Comma-separated names from BG/REG/VUG/FOG, or custom:<model>[+rag].
std::vector<GroupConfig> parse_groups(std::string_view spec, const ModelProfile& base,
                                      const ModelProfile& enhanced);

struct LatencyStats {
  double p50 = 0.0;
  double p95 = 0.0;
  double mean = 0.0;
};

// Nearest-rank percentile: the ceil(p/100 * n)-th smallest value.
double nearest_rank_percentile(std::vector<double> values, double p);

struct GroupMetrics {
  std::string name;
  std::string model;
  bool rag = false;
  std::size_t items = 0;
  double accuracy = 0.0;
  double answer_fact_recall = 0.0;
  std::optional<double> retrieval_recall;  // rag groups only
  LatencyStats latency_ms;
};

GroupMetrics compute_metrics(const std::vector<QAItem>& items,
                             const std::vector<QueryResult>& results);

struct GroupDelta {
  std::string group;
  double accuracy_points = 0.0;
  double answer_fact_recall_points = 0.0;
  std::optional<double> latency_change_pct;  // p50 vs BG
};

struct EvalReport {
  std::size_t item_count = 0;
  std::uint64_t seed = 0;
  std::size_t k = 0;
  std::size_t context_budget = 0;
  std::vector<GroupMetrics> groups;
  std::vector<GroupDelta> deltas_vs_bg;
};

using CompleterFactory =
    std::function<std::shared_ptr<const Completer>(const GroupConfig& group)>;

struct EvalOptions {
  PipelineOptions pipeline;
  std::uint64_t seed = 0;
  int max_in_flight = 4;
};

EvalReport run_groups(const std::vector<GroupConfig>& groups, const std::vector<QAItem>& items,
                      std::shared_ptr<const Corpus> corpus,
                      std::shared_ptr<const Embedder> embedder,
                      const CompleterFactory& completer_for, const EvalOptions& options);

std::string eval_report_to_json(const EvalReport& report);
std::string eval_report_to_table(const EvalReport& report);

}  // namespace finrag
