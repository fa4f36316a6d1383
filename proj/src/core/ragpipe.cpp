#include "core/ragpipe.hpp"

#include <chrono>

#include "core/text_util.hpp"
#include "json.hpp"

namespace finrag {
namespace {

using Clock = std::chrono::steady_clock;

double ms_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

}  // namespace

std::string_view mode_name(QueryMode mode) {
  return mode == QueryMode::kRag ? "rag" : "baseline";
}

QueryMode parse_mode(std::string_view name) {
  if (name == "rag") return QueryMode::kRag;
  if (name == "baseline") return QueryMode::kBaseline;
  fail(ErrorCode::kInvalidArgument,
       "unknown mode '" + std::string(name) + "' (expected rag or baseline)");
}

std::string query_result_to_json(const QueryResult& r) {
  using nlohmann::json;
  json retrieved = json::array();
  for (const auto& h : r.retrieved)
    retrieved.push_back({{"id", h.id}, {"score", h.score}, {"rank", h.rank}});
  json doc = {{"question", r.question},
              {"mode", mode_name(r.mode)},
              {"retrieved", retrieved},
              {"context", r.context},
              {"answer", r.answer},
              {"latency_ms",
               {{"embed", r.latency.embed_ms},
                {"search", r.latency.search_ms},
                {"llm", r.latency.llm_ms},
                {"total", r.latency.total_ms}}}};
  return doc.dump();
}

AssembledContext assemble_context_detail(std::span<const std::string> passage_texts,
                                         std::size_t budget) {
  AssembledContext out;
  for (std::size_t i = 0; i < passage_texts.size(); ++i) {
    std::string candidate = out.text;
    if (!candidate.empty()) candidate += kPassageSeparator;
    candidate += passage_texts[i];
    if (estimate_tokens(candidate) > budget) continue;
    out.text = std::move(candidate);
    out.included.push_back(i);
  }
  return out;
}

std::string assemble_context(std::span<const std::string> passage_texts, std::size_t budget) {
  return assemble_context_detail(passage_texts, budget).text;
}

std::vector<ChatMessage> build_prompt(std::string_view question, std::string_view context,
                                      QueryMode mode) {
  if (trim(question).empty()) fail(ErrorCode::kEmptyQuestion, "question is empty");
  if (mode == QueryMode::kBaseline)
    return {{Role::kSystem, std::string(kBaselineSystemPrompt)},
            {Role::kUser, std::string(question)}};
  std::string user = "Context:\n";
  user += context;
  user += "\n\nQuestion: ";
  user += question;
  return {{Role::kSystem, std::string(kRagSystemPrompt)}, {Role::kUser, std::move(user)}};
}

Corpus::Corpus(FlatIndex idx, std::vector<Passage> ps) : index(std::move(idx)) {
  for (auto& p : ps) {
    std::string id = p.id;
    passages.emplace(std::move(id), std::move(p));
  }
  for (const auto& id : index.ids())
    if (!passages.count(id))
      fail(ErrorCode::kCorruptIndex, "index id '" + id + "' has no passage text");
}

const Passage& Corpus::passage(const std::string& id) const {
  auto it = passages.find(id);
  if (it == passages.end()) fail(ErrorCode::kInternal, "unknown passage '" + id + "'");
  return it->second;
}

RagPipeline::RagPipeline(std::shared_ptr<const Corpus> corpus,
                         std::shared_ptr<const Embedder> embedder,
                         std::shared_ptr<const Completer> completer, PipelineOptions options)
    : corpus_(std::move(corpus)),
      embedder_(std::move(embedder)),
      completer_(std::move(completer)),
      options_(options) {
  if (!completer_) fail(ErrorCode::kConfig, "pipeline needs a completer");
  if (options_.k == 0) fail(ErrorCode::kConfig, "k must be >= 1");
  if (options_.context_budget == 0) fail(ErrorCode::kConfig, "context budget must be >= 1");
}

QueryResult RagPipeline::answer_query(std::string_view question, QueryMode mode) const {
  return answer_query(question, mode, options_.k);
}

QueryResult RagPipeline::answer_query(std::string_view question, QueryMode mode,
                                      std::size_t k) const {
  if (trim(question).empty()) fail(ErrorCode::kEmptyQuestion, "question is empty");
  if (k == 0) fail(ErrorCode::kInvalidArgument, "k must be >= 1");
  const auto t0 = Clock::now();
  QueryResult result;
  result.question = std::string(question);
  result.mode = mode;

  auto t_embed = t0;
  auto t_search = t0;
  if (mode == QueryMode::kRag) {
    if (!corpus_) fail(ErrorCode::kInvalidArgument, "rag mode requires a loaded index");
    if (corpus_->index.count() > 0) {
      if (!embedder_) fail(ErrorCode::kConfig, "rag mode requires an embedder");
      const std::string text(question);
      auto vectors = embedder_->embed_texts(std::span<const std::string>(&text, 1));
      t_embed = Clock::now();
      result.retrieved = corpus_->index.search(vectors.front().values, k);
      t_search = Clock::now();
      std::vector<std::string> texts;
      texts.reserve(result.retrieved.size());
      for (const auto& hit : result.retrieved) texts.push_back(corpus_->passage(hit.id).text);
      result.context = assemble_context(texts, options_.context_budget);
    }
  }
  const auto t_llm0 = Clock::now();
  auto exchange = completer_->complete(build_prompt(question, result.context, mode));
  const auto t_end = Clock::now();
  result.answer = std::move(exchange.answer);

  result.latency.embed_ms = ms_between(t0, t_embed);
  result.latency.search_ms = ms_between(t_embed, t_search);
  result.latency.llm_ms = ms_between(t_llm0, t_end);
  result.latency.total_ms = ms_between(t0, t_end);
  return result;
}

}  // namespace finrag
