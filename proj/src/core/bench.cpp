#include "core/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <span>

#include "core/evalbench.hpp"
#include "core/vecstore.hpp"
#include "json.hpp"

namespace finrag {

std::vector<float> random_matrix(std::size_t rows, std::size_t dim, std::uint64_t seed,
                                 bool normalize) {
  std::mt19937_64 engine(seed);
  std::vector<float> out(rows * dim);
  for (auto& x : out) {
    // 24 high bits -> exactly representable float in [0, 1).
    const float u = static_cast<float>(engine() >> 40) * 0x1.0p-24f;
    x = 2.0f * u - 1.0f;
  }
  if (normalize) {
    for (std::size_t r = 0; r < rows; ++r) {
      std::span<float> row(out.data() + r * dim, dim);
      double sum = 0.0;
      for (float v : row) sum += static_cast<double>(v) * v;
      const double norm = std::sqrt(sum);
      if (norm > 0.0)
        for (float& v : row) v = static_cast<float>(v / norm);
    }
  }
  return out;
}

SearchBenchResult bench_search(std::size_t n, std::size_t dim, std::size_t queries,
                               std::size_t k, std::uint64_t seed) {
  FlatIndex index(dim);
  {
    const auto data = random_matrix(n, dim, seed, true);
    for (std::size_t i = 0; i < n; ++i)
      index.add("v" + std::to_string(i), std::span<const float>(data.data() + i * dim, dim));
  }
  const auto qs = random_matrix(queries, dim, seed ^ 0x9e3779b97f4a7c15ULL, true);

  std::vector<double> times;
  times.reserve(queries);
  for (std::size_t q = 0; q < queries; ++q) {
    const auto start = std::chrono::steady_clock::now();
    auto hits = index.search(std::span<const float>(qs.data() + q * dim, dim), k);
    const auto stop = std::chrono::steady_clock::now();
    if (hits.empty() && n > 0) fail(ErrorCode::kInternal, "benchmark search returned nothing");
    times.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
  }

  SearchBenchResult r{n, dim, k, queries};
  if (!times.empty()) {
    double sum = 0.0;
    for (double t : times) sum += t;
    r.mean_ms = sum / static_cast<double>(times.size());
    r.max_ms = *std::max_element(times.begin(), times.end());
    r.p50_ms = nearest_rank_percentile(times, 50);
    r.p95_ms = nearest_rank_percentile(times, 95);
  }
  return r;
}

std::string bench_result_to_json(const SearchBenchResult& r) {
  nlohmann::json doc = {{"n", r.n},           {"dim", r.dim},       {"k", r.k},
                        {"queries", r.queries}, {"mean_ms", r.mean_ms}, {"p50_ms", r.p50_ms},
                        {"p95_ms", r.p95_ms},   {"max_ms", r.max_ms}};
  return doc.dump();
}

}  // namespace finrag
