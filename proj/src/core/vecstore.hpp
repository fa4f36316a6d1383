#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "core/error.hpp"

namespace finrag {

inline constexpr std::size_t kDefaultTopK = 5;

struct SearchHit {
  std::string id;
  double score = 0.0;
  std::size_t rank = 0;      // 1-based
  std::size_t position = 0;  // insertion position

  friend bool operator==(const SearchHit&, const SearchHit&) = default;
};

// Inner product of float32 rows accumulated in double.
double dot_f64(const float* a, const float* b, std::size_t n);

/// Exact inner-product index over row-major float32 storage. Results are
/// ordered by score descending, then by insertion order.
///
/// Search is const and safe to run concurrently; add/load need exclusive
/// access.
class FlatIndex {
 public:
  static constexpr char kMagic[4] = {'F', 'R', 'I', 'X'};
  static constexpr std::uint16_t kFormatVersion = 1;

  explicit FlatIndex(std::size_t dim);

  void add(std::string id, std::span<const float> vector);

  std::vector<SearchHit> search(std::span<const float> query, std::size_t k) const;

  // Queries are row-major, query_count x dim.
  std::vector<std::vector<SearchHit>> search_batch(std::span<const float> queries,
                                                   std::size_t k) const;

  std::size_t dim() const { return dim_; }
  std::size_t count() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  std::span<const float> row(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }
  std::span<const float> data() const { return data_; }
  bool contains(const std::string& id) const { return positions_.count(id) > 0; }

  std::size_t save(std::ostream& sink) const;
  std::string serialize() const;
  static FlatIndex load(std::istream& source);
  static FlatIndex deserialize(std::string_view bytes);

  // Writes to a sibling temp file and renames over `path`.
  std::size_t save_file(const std::string& path) const;
  static FlatIndex load_file(const std::string& path);

 private:
  void check_dim(std::size_t n, const char* what) const;

  std::size_t dim_;
  std::vector<std::string> ids_;
  std::vector<float> data_;
  std::unordered_map<std::string, std::size_t> positions_;
};

std::uint32_t crc32_of(std::string_view bytes);

}  // namespace finrag
