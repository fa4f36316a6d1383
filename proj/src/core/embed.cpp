#include "core/embed.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "core/http_util.hpp"
#include "json.hpp"

namespace finrag {

using nlohmann::json;

void EmbedderProfile::validate() const {
  if (dim == 0) fail(ErrorCode::kConfig, "embedding dim must be positive");
  if (batch_size == 0) fail(ErrorCode::kConfig, "embedding batch_size must be >= 1");
  if (max_in_flight < 1) fail(ErrorCode::kConfig, "embedding max_in_flight must be >= 1");
  if (kind == EmbedderKind::kRemote && endpoint_base.empty())
    fail(ErrorCode::kConfig, "remote embedder requires an endpoint (EMBED_API_BASE)");
}

double l2_norm(std::span<const float> v) {
  double sum = 0.0;
  for (float x : v) sum += static_cast<double>(x) * x;
  return std::sqrt(sum);
}

EmbeddingVector l2_normalize(EmbeddingVector v) {
  const double norm = l2_norm(v.values);
  if (norm > 0.0)
    for (float& x : v.values) x = static_cast<float>(x / norm);
  return v;
}

std::uint64_t feature_hash(std::string_view feature) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : feature) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdULL;
  h ^= h >> 33;
  h *= 0xc4ceb9fe1a85ec53ULL;
  h ^= h >> 33;
  return h;
}

std::vector<std::string> hash_features(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c >= 0x80) {
      current.push_back(ch);
    } else if (c >= 'A' && c <= 'Z') {
      current.push_back(static_cast<char>(c - 'A' + 'a'));
    } else if (!current.empty()) {
      words.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) words.push_back(std::move(current));

  std::vector<std::string> features = words;
  for (std::size_t i = 1; i < words.size(); ++i)
    features.push_back(words[i - 1] + " " + words[i]);
  return features;
}

HashEmbedding hash_embed_raw(std::string_view text, std::size_t dim, bool normalize) {
  if (dim == 0) fail(ErrorCode::kInvalidArgument, "dim must be positive");
  std::vector<double> acc(dim, 0.0);
  for (const auto& f : hash_features(text)) {
    const std::uint64_t h = feature_hash(f);
    acc[h % dim] += (h >> 63) ? -1.0 : 1.0;
  }
  double norm = 0.0;
  for (double x : acc) norm += x * x;
  norm = std::sqrt(norm);

  HashEmbedding out;
  out.zero = norm == 0.0;
  out.vector.values.resize(dim);
  const double scale = (normalize && !out.zero) ? 1.0 / norm : 1.0;
  for (std::size_t i = 0; i < dim; ++i)
    out.vector.values[i] = static_cast<float>(acc[i] * scale);
  return out;
}

HashEmbedding hash_embed(std::string_view text, std::size_t dim) {
  return hash_embed_raw(text, dim, true);
}

std::vector<EmbeddingVector> Embedder::embed_texts(std::span<const std::string> texts) const {
  if (texts.empty()) fail(ErrorCode::kEmptyText, "no texts to embed");
  for (std::size_t i = 0; i < texts.size(); ++i)
    if (texts[i].empty()) fail(ErrorCode::kEmptyText, "text " + std::to_string(i) + " is empty");
  auto out = embed_batch(texts);
  if (out.size() != texts.size())
    fail(ErrorCode::kInternal, "embedder returned a misaligned batch");
  return out;
}

LocalHashEmbedder::LocalHashEmbedder(std::size_t dim, bool normalize)
    : dim_(dim), normalize_(normalize) {
  if (dim_ == 0) fail(ErrorCode::kConfig, "embedding dim must be positive");
}

std::vector<EmbeddingVector> LocalHashEmbedder::embed_batch(
    std::span<const std::string> texts) const {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(hash_embed_raw(t, dim_, normalize_).vector);
  return out;
}

RemoteEmbedder::RemoteEmbedder(EmbedderProfile profile, std::string api_key)
    : profile_(std::move(profile)), api_key_(std::move(api_key)) {
  profile_.kind = EmbedderKind::kRemote;
  profile_.validate();
}

std::vector<EmbeddingVector> RemoteEmbedder::request(std::span<const std::string> texts) const {
  json body = {{"model", profile_.model_name},
               {"input", std::vector<std::string>(texts.begin(), texts.end())}};
  const std::string payload = body.dump();
  const Endpoint endpoint = parse_endpoint(profile_.endpoint_base);

  HttpOutcome outcome;
  for (int attempt = 0;; ++attempt) {
    outcome = post_json(endpoint, "/embeddings", payload, api_key_, profile_.timeout);
    if (outcome.ok() || !outcome.retryable() || attempt >= profile_.max_retries) break;
    std::this_thread::sleep_for(profile_.backoff_base * (1 << attempt));
  }
  if (!outcome.ok()) {
    fail(ErrorCode::kEmbedderUnavailable,
         "embedding request failed: " +
             (outcome.status ? "HTTP " + std::to_string(outcome.status) : outcome.detail));
  }

  json doc = json::parse(outcome.body, nullptr, false);
  if (doc.is_discarded() || !doc.contains("data") || !doc["data"].is_array())
    fail(ErrorCode::kEmbedderUnavailable, "embedding response lacks a data array");
  const auto& data = doc["data"];
  if (data.size() != texts.size())
    fail(ErrorCode::kEmbedderUnavailable, "embedding response has " +
                                              std::to_string(data.size()) + " items, expected " +
                                              std::to_string(texts.size()));

  std::vector<EmbeddingVector> out(texts.size());
  std::vector<bool> seen(texts.size(), false);
  for (std::size_t pos = 0; pos < data.size(); ++pos) {
    const auto& item = data[pos];
    const std::size_t index = item.value("index", pos);
    if (index >= texts.size() || seen[index] || !item.contains("embedding") ||
        !item["embedding"].is_array())
      fail(ErrorCode::kEmbedderUnavailable, "malformed embedding item");
    seen[index] = true;
    const auto& values = item["embedding"];
    if (values.size() != profile_.dim)
      fail(ErrorCode::kDimensionMismatch, "embedding has dim " + std::to_string(values.size()) +
                                              ", expected " + std::to_string(profile_.dim));
    EmbeddingVector v;
    v.values.reserve(values.size());
    for (const auto& x : values) {
      if (!x.is_number()) fail(ErrorCode::kEmbedderUnavailable, "non-numeric embedding value");
      const double d = x.get<double>();
      if (!std::isfinite(d)) fail(ErrorCode::kEmbedderUnavailable, "non-finite embedding value");
      v.values.push_back(static_cast<float>(d));
    }
    out[index] = profile_.normalize ? l2_normalize(std::move(v)) : std::move(v);
  }
  return out;
}

std::vector<EmbeddingVector> RemoteEmbedder::embed_batch(std::span<const std::string> texts) const {
  const std::size_t batch = profile_.batch_size;
  const std::size_t batches = (texts.size() + batch - 1) / batch;
  std::vector<EmbeddingVector> out(texts.size());

  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t b = next.fetch_add(1);
      if (b >= batches) return;
      {
        std::lock_guard lock(error_mutex);
        if (first_error) return;
      }
      const std::size_t begin = b * batch;
      const std::size_t len = std::min(batch, texts.size() - begin);
      try {
        auto vectors = request(texts.subspan(begin, len));
        for (std::size_t i = 0; i < len; ++i) out[begin + i] = std::move(vectors[i]);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };

  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(profile_.max_in_flight), batches);
  {
    std::vector<std::jthread> pool;
    for (std::size_t i = 1; i < workers; ++i) pool.emplace_back(worker);
    worker();
  }
  if (first_error) std::rethrow_exception(first_error);
  return out;
}

std::unique_ptr<Embedder> make_embedder(const EmbedderProfile& profile,
                                        const std::string& api_key) {
  profile.validate();
  if (profile.kind == EmbedderKind::kRemote)
    return std::make_unique<RemoteEmbedder>(profile, api_key);
  return std::make_unique<LocalHashEmbedder>(profile.dim, profile.normalize);
}

}  // namespace finrag
