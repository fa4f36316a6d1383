#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "core/error.hpp"

namespace finrag {

inline constexpr std::size_t kDefaultEmbeddingDim = 384;

struct EmbeddingVector {
  std::vector<float> values;

  std::size_t dim() const { return values.size(); }
  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;
};

enum class EmbedderKind { kRemote, kLocalHash };

struct EmbedderProfile {
  EmbedderKind kind = EmbedderKind::kLocalHash;
  std::string model_name = "all-MiniLM-L6-v2";
  std::size_t dim = kDefaultEmbeddingDim;
  bool normalize = true;
  std::size_t batch_size = 32;
  std::string endpoint_base;
  std::chrono::milliseconds timeout{30000};
  int max_retries = 2;
  std::chrono::milliseconds backoff_base{250};
  int max_in_flight = 4;

  void validate() const;
};

double l2_norm(std::span<const float> v);
EmbeddingVector l2_normalize(EmbeddingVector v);

// Stable 64-bit feature hash (FNV-1a followed by a murmur3 finalizer).
std::uint64_t feature_hash(std::string_view feature);

// Lowercased word unigrams followed by adjacent-word bigrams ("a b").
std::vector<std::string> hash_features(std::string_view text);

struct HashEmbedding {
  EmbeddingVector vector;
  bool zero = false;  // no features landed; returned unnormalized
};

HashEmbedding hash_embed_raw(std::string_view text, std::size_t dim, bool normalize);
HashEmbedding hash_embed(std::string_view text, std::size_t dim);

class Embedder {
 public:
  virtual ~Embedder() = default;

  // Aligned index-for-index with `texts`. Rejects empty input and empty texts.
  std::vector<EmbeddingVector> embed_texts(std::span<const std::string> texts) const;

  virtual std::size_t dim() const = 0;

 protected:
  virtual std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const = 0;
};

class LocalHashEmbedder final : public Embedder {
 public:
  explicit LocalHashEmbedder(std::size_t dim = kDefaultEmbeddingDim, bool normalize = true);
  std::size_t dim() const override { return dim_; }

 protected:
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const override;

 private:
  std::size_t dim_;
  bool normalize_;
};

/// Client for POST {base}/embeddings. Batches of batch_size are sent with at
/// most max_in_flight requests outstanding.
class RemoteEmbedder final : public Embedder {
 public:
  RemoteEmbedder(EmbedderProfile profile, std::string api_key);
  std::size_t dim() const override { return profile_.dim; }

 protected:
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const override;

 private:
  std::vector<EmbeddingVector> request(std::span<const std::string> texts) const;

  EmbedderProfile profile_;
  std::string api_key_;
};

std::unique_ptr<Embedder> make_embedder(const EmbedderProfile& profile,
                                        const std::string& api_key);

}  // namespace finrag
