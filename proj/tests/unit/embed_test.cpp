#include <bit>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "core/embed.hpp"
#include "doctest.h"
#include "json.hpp"
#include "support/fake_server.hpp"

using namespace finrag;
using finrag::testing::FakeResponse;
using finrag::testing::FakeServer;

namespace {

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  double dot = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) dot += double(a.values[i]) * b.values[i];
  return dot / (l2_norm(a.values) * l2_norm(b.values));
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kOk;
}

}  // namespace

TEST_CASE("hash embedding is deterministic, 384-dimensional and unit norm") {
  const std::string text =
      "For the quarter ending 2023-03-31, Apple Inc. (AAPL) reported Revenue of 100000000 USD.";
  auto a = hash_embed(text, 384);
  auto b = hash_embed(text, 384);
  CHECK(a.vector == b.vector);
  CHECK(a.vector.dim() == 384);
  CHECK(!a.zero);
  CHECK(std::fabs(l2_norm(a.vector.values) - 1.0) <= 1e-6);
}

TEST_CASE("a single feature lands on one signed coordinate") {
  auto e = hash_embed("revenue", 8);
  const std::uint64_t h = feature_hash("revenue");
  for (std::size_t i = 0; i < 8; ++i) {
    const float expected = i == h % 8 ? ((h >> 63) ? -1.0f : 1.0f) : 0.0f;
    CHECK(e.vector.values[i] == expected);
  }
}

TEST_CASE("feature extraction lowercases and adds bigrams") {
  CHECK(hash_features("Net-Income, ROSE") ==
        std::vector<std::string>{"net", "income", "rose", "net income", "income rose"});
  CHECK(hash_features("...").empty());
  CHECK(hash_features("Caf\xC3\xA9") == std::vector<std::string>{"caf\xC3\xA9"});
}

TEST_CASE("lexical overlap drives similarity") {
  const std::string base = "alpha bravo charlie delta echo foxtrot golf hotel india juliet";
  const std::string near = "alpha bravo charlie delta echo foxtrot golf hotel india kilo";
  const std::string far = "lima mike november oscar papa quebec romeo sierra tango uniform";
  auto e0 = hash_embed(base, 384).vector;
  CHECK(cosine(e0, hash_embed(near, 384).vector) > cosine(e0, hash_embed(far, 384).vector));
  CHECK(cosine(e0, hash_embed(near, 384).vector) > 0.7);
}

TEST_CASE("texts with no features embed as flagged zero vectors") {
  auto e = hash_embed("!!! ???", 16);
  CHECK(e.zero);
  CHECK(l2_norm(e.vector.values) == 0.0);
}

TEST_CASE("l2_normalize") {
  auto v = l2_normalize(EmbeddingVector{{3.0f, 4.0f}});
  CHECK(v.values[0] == doctest::Approx(0.6).epsilon(1e-7));
  CHECK(v.values[1] == doctest::Approx(0.8).epsilon(1e-7));
  auto zero = l2_normalize(EmbeddingVector{{0.0f, 0.0f}});
  CHECK(zero.values == std::vector<float>{0.0f, 0.0f});
}

TEST_CASE("property: normalizing any non-zero vector gives unit norm") {
  std::mt19937_64 rng(5);
  std::normal_distribution<float> gauss(0.0f, 10.0f);
  for (int trial = 0; trial < 500; ++trial) {
    EmbeddingVector v;
    v.values.resize(1 + rng() % 512);
    for (auto& x : v.values) x = gauss(rng);
    if (l2_norm(v.values) == 0.0) continue;
    CHECK(std::fabs(l2_norm(l2_normalize(v).values) - 1.0) <= 1e-6);
  }
}

TEST_CASE("golden vectors match the independent reference implementation") {
  std::ifstream in(FINRAG_GOLDEN_DIR "/hash_embed.tsv");
  REQUIRE(in);
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    const auto tab = line.find('\t');
    REQUIRE(tab != std::string::npos);
    const std::string text = nlohmann::json::parse(line.substr(0, tab)).get<std::string>();
    std::istringstream bits(line.substr(tab + 1));
    auto e = hash_embed(text, 384);
    for (std::size_t i = 0; i < 384; ++i) {
      std::string hex;
      bits >> hex;
      const auto expected = static_cast<std::uint32_t>(std::stoul(hex, nullptr, 16));
      INFO("text: " << text << " component " << i);
      CHECK(std::bit_cast<std::uint32_t>(e.vector.values[i]) == expected);
    }
    ++rows;
  }
  CHECK(rows == 10);
}

TEST_CASE("embed_texts rejects empty input") {
  LocalHashEmbedder embedder(32);
  CHECK(code_of([&] { embedder.embed_texts({}); }) == ErrorCode::kEmptyText);
  std::vector<std::string> texts{"ok", ""};
  CHECK(code_of([&] { embedder.embed_texts(texts); }) == ErrorCode::kEmptyText);
  CHECK(code_of([] { LocalHashEmbedder bad(0); }) == ErrorCode::kConfig);
}

namespace {

// Embeds each input with the hash embedder and replies in reverse order so
// the client has to honour the "index" field.
FakeServer::Handler reversed_embedding_handler(std::size_t reply_dim) {
  return [reply_dim](const std::string&, const std::string& body) {
    auto doc = nlohmann::json::parse(body);
    nlohmann::json data = nlohmann::json::array();
    const auto& input = doc["input"];
    for (std::size_t i = input.size(); i-- > 0;) {
      auto e = hash_embed_raw(input[i].get<std::string>(), reply_dim, false).vector.values;
      data.push_back({{"index", i}, {"embedding", e}});
    }
    return FakeResponse{200, nlohmann::json{{"data", data}}.dump()};
  };
}

EmbedderProfile remote_profile(const FakeServer& server, std::size_t batch) {
  EmbedderProfile profile;
  profile.kind = EmbedderKind::kRemote;
  profile.endpoint_base = server.base_url();
  profile.batch_size = batch;
  profile.backoff_base = std::chrono::milliseconds(1);
  profile.timeout = std::chrono::milliseconds(2000);
  return profile;
}

}  // namespace

TEST_CASE("remote embedder keeps inputs aligned across batches") {
  FakeServer server(reversed_embedding_handler(384));
  RemoteEmbedder embedder(remote_profile(server, 3), "embed-secret");
  std::vector<std::string> texts;
  for (int i = 0; i < 10; ++i) texts.push_back("text number " + std::to_string(i * 37));
  auto out = embedder.embed_texts(texts);
  REQUIRE(out.size() == 10);
  LocalHashEmbedder local(384);
  auto expected = local.embed_texts(texts);
  for (std::size_t i = 0; i < texts.size(); ++i)
    for (std::size_t j = 0; j < 384; ++j)
      CHECK(out[i].values[j] == doctest::Approx(expected[i].values[j]).epsilon(1e-6));
  CHECK(server.request_count() == 4);
  for (const auto& auth : server.authorization_headers()) CHECK(auth == "Bearer embed-secret");
  auto first = nlohmann::json::parse(server.bodies().front());
  CHECK(first["model"] == "all-MiniLM-L6-v2");
}

TEST_CASE("remote embedder reports wrong dimensions") {
  FakeServer server(reversed_embedding_handler(5));
  RemoteEmbedder embedder(remote_profile(server, 32), "");
  std::vector<std::string> texts{"a", "b"};
  CHECK(code_of([&] { embedder.embed_texts(texts); }) == ErrorCode::kDimensionMismatch);
}

TEST_CASE("remote embedder retries then gives up") {
  FakeServer server([](const std::string&, const std::string&) {
    return FakeResponse{503, "{}"};
  });
  RemoteEmbedder embedder(remote_profile(server, 32), "");
  std::vector<std::string> texts{"a"};
  CHECK(code_of([&] { embedder.embed_texts(texts); }) == ErrorCode::kEmbedderUnavailable);
  CHECK(server.request_count() == 3);
}

TEST_CASE("remote embedder requires an endpoint") {
  EmbedderProfile profile;
  profile.kind = EmbedderKind::kRemote;
  CHECK(code_of([&] { make_embedder(profile, ""); }) == ErrorCode::kConfig);
  profile.kind = EmbedderKind::kLocalHash;
  CHECK(make_embedder(profile, "")->dim() == 384);
}
