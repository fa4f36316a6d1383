#include <fstream>
#include <random>
#include <sstream>

#include "core/docbuild.hpp"
#include "core/ragpipe.hpp"
#include "doctest.h"
#include "json.hpp"
#include "support/fixtures.hpp"

using namespace finrag;
using finrag::testing::apple_revenue;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kOk;
}

const std::string kQuestion = "What was Apple Inc.'s Revenue for the quarter ending 2023-03-31?";

std::shared_ptr<const Corpus> corpus_from(const std::vector<FinRecord>& records,
                                          const Embedder& embedder) {
  auto passages = build_passages(records);
  FlatIndex index(embedder.dim());
  if (!passages.empty()) {
    std::vector<std::string> texts;
    for (const auto& p : passages) texts.push_back(p.text);
    auto vectors = embedder.embed_texts(texts);
    for (std::size_t i = 0; i < passages.size(); ++i) index.add(passages[i].id, vectors[i].values);
  }
  return std::make_shared<Corpus>(std::move(index), std::move(passages));
}

// Counts calls and records the last prompt; answers with a fixed string.
class RecordingCompleter final : public Completer {
 public:
  ChatExchange complete(const std::vector<ChatMessage>& messages) const override {
    ++calls;
    last = messages;
    ChatExchange e;
    e.messages = messages;
    e.answer = "fixed";
    return e;
  }
  std::string_view model_name() const override { return "recording"; }
  mutable int calls = 0;
  mutable std::vector<ChatMessage> last;
};

}  // namespace

TEST_CASE("assemble_context examples") {
  const std::string hundred(400, 'a');
  CHECK(assemble_context(std::vector<std::string>{hundred}) == hundred);
  CHECK(assemble_context(std::vector<std::string>{}).empty());

  std::vector<std::string> five;
  for (char c = 'a'; c < 'f'; ++c) five.push_back(std::string(1200, c));
  for (const auto& p : five) REQUIRE(estimate_tokens(p) == 300);
  auto detail = assemble_context_detail(five, 1024);
  CHECK(detail.included == std::vector<std::size_t>{0, 1, 2});
  CHECK(detail.text == five[0] + "\n\n" + five[1] + "\n\n" + five[2]);
  CHECK(estimate_tokens(detail.text) <= 1024);
}

TEST_CASE("assemble_context skips oversize passages but keeps later ones") {
  std::vector<std::string> texts{std::string(400, 'a'), std::string(8000, 'b'),
                                 std::string(400, 'c')};
  auto detail = assemble_context_detail(texts, 1024);
  CHECK(detail.included == std::vector<std::size_t>{0, 2});
}

TEST_CASE("property: context respects the budget and rank order") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::string> texts(rng() % 12);
    for (auto& t : texts) t = std::string(1 + rng() % 2500, static_cast<char>('a' + rng() % 26));
    const std::size_t budget = 1 + rng() % 1500;
    auto detail = assemble_context_detail(texts, budget);
    CHECK(estimate_tokens(detail.text) <= budget);
    CHECK(std::is_sorted(detail.included.begin(), detail.included.end()));
    std::string rebuilt;
    for (std::size_t i : detail.included) {
      if (!rebuilt.empty()) rebuilt += "\n\n";
      rebuilt += texts[i];
    }
    CHECK(rebuilt == detail.text);
    // Nothing excluded would still fit on the end.
    for (std::size_t i = 0; i < texts.size(); ++i) {
      if (std::find(detail.included.begin(), detail.included.end(), i) != detail.included.end())
        continue;
      const std::string extended = detail.text.empty() ? texts[i] : detail.text + "\n\n" + texts[i];
      CHECK(estimate_tokens(extended) > budget);
    }
  }
}

TEST_CASE("build_prompt shapes") {
  auto baseline = build_prompt(kQuestion, "", QueryMode::kBaseline);
  REQUIRE(baseline.size() == 2);
  CHECK(baseline[0].role == Role::kSystem);
  CHECK(baseline[1].role == Role::kUser);
  CHECK(baseline[1].content == kQuestion);

  auto rag = build_prompt(kQuestion, "CTX", QueryMode::kRag);
  REQUIRE(rag.size() == 2);
  CHECK(rag[0].content.find("Answer strictly from the provided context") != std::string::npos);
  CHECK(rag[1].content.find("CTX") < rag[1].content.find(kQuestion));

  CHECK(code_of([] { build_prompt("  ", "x", QueryMode::kRag); }) == ErrorCode::kEmptyQuestion);
  CHECK(code_of([] { build_prompt("", "", QueryMode::kBaseline); }) == ErrorCode::kEmptyQuestion);
}

TEST_CASE("rag prompt matches the committed golden file") {
  std::ifstream in(FINRAG_GOLDEN_DIR "/prompt_rag.json");
  REQUIRE(in);
  auto golden = nlohmann::json::parse(in);
  auto messages = build_prompt(golden["question"].get<std::string>(),
                               golden["context"].get<std::string>(), QueryMode::kRag);
  REQUIRE(messages.size() == golden["messages"].size());
  for (std::size_t i = 0; i < messages.size(); ++i) {
    CHECK(role_name(messages[i].role) == golden["messages"][i]["role"].get<std::string>());
    CHECK(messages[i].content == golden["messages"][i]["content"].get<std::string>());
  }
}

TEST_CASE("answer_query on the reference passage") {
  auto embedder = std::make_shared<LocalHashEmbedder>();
  auto corpus = corpus_from({apple_revenue()}, *embedder);
  RagPipeline pipeline(corpus, embedder, std::make_shared<ScriptedCompleter>());

  auto rag = pipeline.answer_query(kQuestion, QueryMode::kRag);
  CHECK(rag.answer == "100000000");
  REQUIRE(rag.retrieved.size() == 1);
  CHECK(rag.retrieved[0].id == "AAPL:2023-03-31");
  CHECK(rag.retrieved[0].rank == 1);
  CHECK(rag.context == corpus->passage("AAPL:2023-03-31").text);
  CHECK(rag.latency.total_ms >= rag.latency.embed_ms);
  CHECK(rag.latency.total_ms >= rag.latency.search_ms);
  CHECK(rag.latency.total_ms >= rag.latency.llm_ms);

  auto baseline = pipeline.answer_query(kQuestion, QueryMode::kBaseline);
  CHECK(baseline.answer == kInsufficientContext);
  CHECK(baseline.retrieved.empty());
  CHECK(baseline.context.empty());

  auto doc = nlohmann::json::parse(query_result_to_json(rag));
  CHECK(doc["mode"] == "rag");
  CHECK(doc["retrieved"][0]["id"] == "AAPL:2023-03-31");
  CHECK(doc["latency_ms"].contains("embed"));
  CHECK(doc["latency_ms"].contains("total"));
}

TEST_CASE("rag over an empty index proceeds with empty context") {
  auto embedder = std::make_shared<LocalHashEmbedder>();
  auto corpus = std::make_shared<Corpus>(384);
  RagPipeline pipeline(corpus, embedder, std::make_shared<ScriptedCompleter>());
  auto result = pipeline.answer_query(kQuestion, QueryMode::kRag);
  CHECK(result.retrieved.empty());
  CHECK(result.context.empty());
  CHECK(result.answer == kInsufficientContext);
}

TEST_CASE("pipeline preconditions") {
  auto embedder = std::make_shared<LocalHashEmbedder>();
  RagPipeline no_corpus(nullptr, embedder, std::make_shared<ScriptedCompleter>());
  CHECK(code_of([&] { no_corpus.answer_query(kQuestion, QueryMode::kRag); }) ==
        ErrorCode::kInvalidArgument);
  CHECK(no_corpus.answer_query(kQuestion, QueryMode::kBaseline).answer == kInsufficientContext);
  CHECK(code_of([&] { no_corpus.answer_query("", QueryMode::kBaseline); }) ==
        ErrorCode::kEmptyQuestion);
  CHECK(code_of([&] { RagPipeline(nullptr, embedder, nullptr); }) == ErrorCode::kConfig);
  CHECK(parse_mode("rag") == QueryMode::kRag);
  CHECK(parse_mode("baseline") == QueryMode::kBaseline);
  CHECK(code_of([] { parse_mode("hybrid"); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("rank order is preserved and k is honoured") {
  auto embedder = std::make_shared<LocalHashEmbedder>();
  auto records = finrag::testing::synthetic_company_records(40, 0, 8);
  auto corpus = corpus_from(records, *embedder);
  auto completer = std::make_shared<RecordingCompleter>();
  RagPipeline pipeline(corpus, embedder, completer);
  for (std::size_t k : {1u, 3u, 5u, 40u, 100u}) {
    auto result = pipeline.answer_query(kQuestion, QueryMode::kRag, k);
    CHECK(result.retrieved.size() == std::min<std::size_t>(k, 40));
    const std::string text(kQuestion);
    auto q = embedder->embed_texts(std::span<const std::string>(&text, 1));
    CHECK(result.retrieved == corpus->index.search(q[0].values, k));
    std::vector<std::string> texts;
    for (const auto& hit : result.retrieved) texts.push_back(corpus->passage(hit.id).text);
    CHECK(result.context == assemble_context(texts, 1024));
    CHECK(estimate_tokens(result.context) <= 1024);
  }
  CHECK(code_of([&] { pipeline.answer_query(kQuestion, QueryMode::kRag, 0); }) ==
        ErrorCode::kInvalidArgument);
}

TEST_CASE("baseline answers ignore index contents; results are deterministic") {
  auto embedder = std::make_shared<LocalHashEmbedder>();
  auto completer = std::make_shared<ScriptedCompleter>();
  RagPipeline a(corpus_from({apple_revenue()}, *embedder), embedder, completer);
  RagPipeline b(corpus_from(finrag::testing::synthetic_company_records(30, 1, 2), *embedder),
                embedder, completer);
  CHECK(a.answer_query(kQuestion, QueryMode::kBaseline).answer ==
        b.answer_query(kQuestion, QueryMode::kBaseline).answer);

  auto r1 = a.answer_query(kQuestion, QueryMode::kRag);
  auto r2 = a.answer_query(kQuestion, QueryMode::kRag);
  CHECK(r1.retrieved == r2.retrieved);
  CHECK(r1.context == r2.context);
  CHECK(r1.answer == r2.answer);
}
