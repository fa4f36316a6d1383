#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace finrag {

// Uniform floats in [-1, 1) from a seeded mt19937_64, optionally L2-normalized
// per row. Reproducible across platforms.
std::vector<float> random_matrix(std::size_t rows, std::size_t dim, std::uint64_t seed,
                                 bool normalize);

struct SearchBenchResult {
  std::size_t n = 0;
  std::size_t dim = 0;
  std::size_t k = 0;
  std::size_t queries = 0;
  double mean_ms = 0.0;
  double p50_ms = 0.0;
  double p95_ms = 0.0;
  double max_ms = 0.0;
};

SearchBenchResult bench_search(std::size_t n, std::size_t dim, std::size_t queries,
                               std::size_t k, std::uint64_t seed);

std::string bench_result_to_json(const SearchBenchResult& result);

}  // namespace finrag
