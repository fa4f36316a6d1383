#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "core/docbuild.hpp"
#include "core/embed.hpp"
#include "core/llmgateway.hpp"
#include "core/vecstore.hpp"

namespace finrag {

inline constexpr std::size_t kDefaultContextBudget = 1024;

enum class QueryMode { kBaseline, kRag };

std::string_view mode_name(QueryMode mode);
QueryMode parse_mode(std::string_view name);

struct LatencyBreakdown {
  double embed_ms = 0.0;
  double search_ms = 0.0;
  double llm_ms = 0.0;
  double total_ms = 0.0;
};

struct QueryResult {
  std::string question;
  QueryMode mode = QueryMode::kRag;
  std::vector<SearchHit> retrieved;
  std::string context;
  std::string answer;
  LatencyBreakdown latency;
};

std::string query_result_to_json(const QueryResult& result);

struct AssembledContext {
  std::string text;
  std::vector<std::size_t> included;  // indices into the input, in order
};

inline constexpr std::string_view kPassageSeparator = "\n\n";

// Whole passages in rank order; a passage that would push the estimate over
// `budget` is skipped.
AssembledContext assemble_context_detail(std::span<const std::string> passage_texts,
                                         std::size_t budget = kDefaultContextBudget);
std::string assemble_context(std::span<const std::string> passage_texts,
                             std::size_t budget = kDefaultContextBudget);

inline constexpr std::string_view kRagSystemPrompt =
    "You are a financial analysis assistant. Answer strictly from the provided context. "
    "If the context does not contain the answer, reply \"INSUFFICIENT CONTEXT\".";
inline constexpr std::string_view kBaselineSystemPrompt =
    "You are a financial analysis assistant. Answer the question about company financial "
    "fundamentals concisely, giving the figure in USD.";

std::vector<ChatMessage> build_prompt(std::string_view question, std::string_view context,
                                      QueryMode mode);

/// Index plus the passage texts behind its ids.
struct Corpus {
  FlatIndex index;
  std::unordered_map<std::string, Passage> passages;

  explicit Corpus(std::size_t dim) : index(dim) {}
  Corpus(FlatIndex idx, std::vector<Passage> ps);

  const Passage& passage(const std::string& id) const;
};

struct PipelineOptions {
  std::size_t k = kDefaultTopK;
  std::size_t context_budget = kDefaultContextBudget;
};

/// Query path: embed, search, budget, prompt, complete. Concurrent calls
/// are safe; the corpus is only read.
class RagPipeline {
 public:
  RagPipeline(std::shared_ptr<const Corpus> corpus, std::shared_ptr<const Embedder> embedder,
              std::shared_ptr<const Completer> completer, PipelineOptions options = {});

  QueryResult answer_query(std::string_view question, QueryMode mode) const;
  QueryResult answer_query(std::string_view question, QueryMode mode, std::size_t k) const;

  const PipelineOptions& options() const { return options_; }

 private:
  std::shared_ptr<const Corpus> corpus_;
  std::shared_ptr<const Embedder> embedder_;
  std::shared_ptr<const Completer> completer_;
  PipelineOptions options_;
};

}  // namespace finrag
