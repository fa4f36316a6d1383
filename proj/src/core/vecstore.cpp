#include "core/vecstore.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace finrag {
namespace {

constexpr std::size_t kRowBlock = 256;
constexpr std::size_t kQueryBlock = 8;

struct Candidate {
  double score;
  std::size_t position;
};

// Strict "ranks ahead of" ordering: higher score, then earlier insertion.
inline bool ranks_ahead(const Candidate& a, const Candidate& b) {
  return a.score > b.score || (a.score == b.score && a.position < b.position);
}

class TopK {
 public:
  explicit TopK(std::size_t k) : k_(k) { heap_.reserve(k); }

  void offer(double score, std::size_t position) {
    Candidate c{score, position};
    if (heap_.size() < k_) {
      heap_.push_back(c);
      std::push_heap(heap_.begin(), heap_.end(), ranks_ahead);
    } else if (ranks_ahead(c, heap_.front())) {
      std::pop_heap(heap_.begin(), heap_.end(), ranks_ahead);
      heap_.back() = c;
      std::push_heap(heap_.begin(), heap_.end(), ranks_ahead);
    }
  }

  std::vector<Candidate> take_sorted() {
    std::sort(heap_.begin(), heap_.end(), ranks_ahead);
    return std::move(heap_);
  }

 private:
  std::size_t k_;
  std::vector<Candidate> heap_;  // heap top is the current worst kept
};

class ByteWriter {
 public:
  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void bytes(std::string_view s) { out_.append(s); }
  std::string& buffer() { return out_; }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  std::string out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view in) : in_(in) {}

  std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  std::string_view bytes(std::size_t n) {
    need(n);
    auto s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return in_.size() - pos_; }
  std::size_t offset() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) fail(ErrorCode::kTruncatedFile, "index file is truncated");
  }
  std::uint64_t get(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::string_view in_;
  std::size_t pos_ = 0;
};

}  // namespace

double dot_f64(const float* a, const float* b, std::size_t n) {
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0, s4 = 0, s5 = 0, s6 = 0, s7 = 0;
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 += static_cast<double>(a[i]) * b[i];
    s1 += static_cast<double>(a[i + 1]) * b[i + 1];
    s2 += static_cast<double>(a[i + 2]) * b[i + 2];
    s3 += static_cast<double>(a[i + 3]) * b[i + 3];
    s4 += static_cast<double>(a[i + 4]) * b[i + 4];
    s5 += static_cast<double>(a[i + 5]) * b[i + 5];
    s6 += static_cast<double>(a[i + 6]) * b[i + 6];
    s7 += static_cast<double>(a[i + 7]) * b[i + 7];
  }
  for (; i < n; ++i) s0 += static_cast<double>(a[i]) * b[i];
  return ((s0 + s4) + (s1 + s5)) + ((s2 + s6) + (s3 + s7));
}

std::uint32_t crc32_of(std::string_view bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large buffers in chunks.
  constexpr std::size_t kChunk = 1u << 30;
  for (std::size_t off = 0; off < bytes.size(); off += kChunk) {
    const auto len = std::min(kChunk, bytes.size() - off);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + off),
                static_cast<uInt>(len));
  }
  return static_cast<std::uint32_t>(crc);
}

FlatIndex::FlatIndex(std::size_t dim) : dim_(dim) {
  if (dim_ == 0) fail(ErrorCode::kInvalidArgument, "index dim must be positive");
}

void FlatIndex::check_dim(std::size_t n, const char* what) const {
  if (n != dim_)
    fail(ErrorCode::kDimensionMismatch, std::string(what) + " has dim " + std::to_string(n) +
                                            ", index dim is " + std::to_string(dim_));
}

void FlatIndex::add(std::string id, std::span<const float> vector) {
  check_dim(vector.size(), "vector");
  if (positions_.count(id)) fail(ErrorCode::kDuplicateId, "duplicate id '" + id + "'");
  for (float x : vector)
    if (!std::isfinite(x)) fail(ErrorCode::kInvalidArgument, "vector has non-finite entries");
  data_.insert(data_.end(), vector.begin(), vector.end());
  positions_.emplace(id, ids_.size());
  ids_.push_back(std::move(id));
}

std::vector<SearchHit> FlatIndex::search(std::span<const float> query, std::size_t k) const {
  return std::move(search_batch(query, k).front());
}

std::vector<std::vector<SearchHit>> FlatIndex::search_batch(std::span<const float> queries,
                                                            std::size_t k) const {
  if (k == 0) fail(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (queries.size() % dim_ != 0 || queries.empty())
    check_dim(queries.size(), "query");
  const std::size_t nq = queries.size() / dim_;
  const std::size_t n = count();
  const std::size_t keep = std::min(k, n);

  std::vector<TopK> heaps;
  heaps.reserve(nq);
  for (std::size_t q = 0; q < nq; ++q) heaps.emplace_back(keep);

  if (keep > 0) {
    for (std::size_t r0 = 0; r0 < n; r0 += kRowBlock) {
      const std::size_t r1 = std::min(n, r0 + kRowBlock);
      for (std::size_t q0 = 0; q0 < nq; q0 += kQueryBlock) {
        const std::size_t q1 = std::min(nq, q0 + kQueryBlock);
        for (std::size_t q = q0; q < q1; ++q) {
          const float* qv = queries.data() + q * dim_;
          TopK& heap = heaps[q];
          for (std::size_t r = r0; r < r1; ++r)
            heap.offer(dot_f64(qv, data_.data() + r * dim_, dim_), r);
        }
      }
    }
  }

  std::vector<std::vector<SearchHit>> results(nq);
  for (std::size_t q = 0; q < nq; ++q) {
    auto sorted = heaps[q].take_sorted();
    results[q].reserve(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i)
      results[q].push_back({ids_[sorted[i].position], sorted[i].score, i + 1, sorted[i].position});
  }
  return results;
}

std::string FlatIndex::serialize() const {
  ByteWriter w;
  w.bytes(std::string_view(kMagic, 4));
  w.u16(kFormatVersion);
  w.u32(static_cast<std::uint32_t>(dim_));
  w.u64(count());
  w.buffer().reserve(w.buffer().size() + data_.size() * 4 + count() * 24 + 4);
  for (float x : data_) w.u32(std::bit_cast<std::uint32_t>(x));
  for (const auto& id : ids_) {
    w.u32(static_cast<std::uint32_t>(id.size()));
    w.bytes(id);
  }
  w.u32(crc32_of(w.buffer()));
  return std::move(w.buffer());
}

std::size_t FlatIndex::save(std::ostream& sink) const {
  const std::string bytes = serialize();
  sink.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!sink) fail(ErrorCode::kIo, "failed to write index");
  return bytes.size();
}

FlatIndex FlatIndex::deserialize(std::string_view bytes) {
  ByteReader r(bytes);
  if (r.bytes(4) != std::string_view(kMagic, 4))
    fail(ErrorCode::kCorruptIndex, "bad index magic");
  if (r.u16() != kFormatVersion) fail(ErrorCode::kCorruptIndex, "unsupported index version");
  const std::uint32_t dim = r.u32();
  const std::uint64_t count = r.u64();
  if (dim == 0) fail(ErrorCode::kCorruptIndex, "index dim is zero");
  if (count > r.remaining() / (static_cast<std::uint64_t>(dim) * 4))
    fail(ErrorCode::kTruncatedFile, "index file is truncated");

  FlatIndex index(dim);
  const std::size_t floats = static_cast<std::size_t>(count) * dim;
  auto raw = r.bytes(floats * 4);
  index.data_.resize(floats);
  for (std::size_t i = 0; i < floats; ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b)
      bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(raw[i * 4 + b])) << (8 * b);
    index.data_[i] = std::bit_cast<float>(bits);
  }
  index.ids_.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint32_t len = r.u32();
    std::string id(r.bytes(len));
    if (!index.positions_.emplace(id, index.ids_.size()).second)
      fail(ErrorCode::kCorruptIndex, "duplicate id in index file");
    index.ids_.push_back(std::move(id));
  }
  const std::size_t body = r.offset();
  const std::uint32_t stored = r.u32();
  if (r.remaining() != 0) fail(ErrorCode::kCorruptIndex, "trailing bytes after checksum");
  if (stored != crc32_of(bytes.substr(0, body)))
    fail(ErrorCode::kCorruptIndex, "index checksum mismatch");
  return index;
}

FlatIndex FlatIndex::load(std::istream& source) {
  std::ostringstream buffer;
  buffer << source.rdbuf();
  if (source.bad()) fail(ErrorCode::kIo, "failed to read index");
  return deserialize(buffer.view());
}

std::size_t FlatIndex::save_file(const std::string& path) const {
  const std::string tmp = path + ".tmp";
  std::size_t written = 0;
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::kIo, "cannot write '" + tmp + "'");
    written = save(out);
    out.flush();
    if (!out) fail(ErrorCode::kIo, "cannot write '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    fail(ErrorCode::kIo, "cannot rename index into place: " + ec.message());
  }
  return written;
}

FlatIndex FlatIndex::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open index '" + path + "'");
  return load(in);
}

}  // namespace finrag
