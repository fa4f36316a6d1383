#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "core/ingest.hpp"

namespace finrag::testing {

inline Date ymd(int y, unsigned m, unsigned d) {
  return Date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
}

// The example row from the dataset description.
inline FinRecord apple_revenue() {
  return {ymd(2023, 3, 31), "Apple Inc.", "AAPL", "Revenue", 100000000.0};
}

inline const std::vector<std::string>& standard_indicators() {
  static const std::vector<std::string> names = {"Assets", "NetIncome", "OperatingIncome",
                                                 "Revenue"};
  return names;
}

// Pronounceable company words from disjoint syllable pools so that pool 0
// and pool 1 never share a word.
inline std::string company_word(std::size_t i, int pool) {
  static const char* lead[2][8] = {{"Zar", "Quil", "Brom", "Vesh", "Tork", "Plim", "Dovr", "Kesk"},
                                   {"Mun", "Fral", "Glib", "Hent", "Jorv", "Lask", "Nirp", "Wost"}};
  static const char* mid[8] = {"a", "e", "i", "o", "u", "ae", "io", "ou"};
  static const char* tail[8] = {"vex", "dor", "lin", "mar", "tus", "qen", "rix", "bal"};
  return std::string(lead[pool][i % 8]) + mid[(i / 8) % 8] + tail[(i / 64) % 8];
}

inline std::string ticker_for(std::size_t i, int pool) {
  std::string t(1, pool == 0 ? 'G' : 'D');
  for (int c = 0; c < 3; ++c) {
    t.push_back(static_cast<char>('A' + i % 26));
    i /= 26;
  }
  return t;
}

// One quarter of the four standard indicators per company.
inline std::vector<FinRecord> synthetic_company_records(std::size_t companies, int pool,
                                                        std::uint64_t seed) {
  static const char* suffix[4] = {"Inc.", "Corp.", "Holdings", "Group"};
  static const unsigned quarter_end[4][2] = {{3, 31}, {6, 30}, {9, 30}, {12, 31}};
  std::mt19937_64 rng(seed);
  std::vector<FinRecord> out;
  for (std::size_t c = 0; c < companies; ++c) {
    const std::string company = company_word(c, pool) + " " + suffix[c % 4];
    const std::string ticker = ticker_for(c, pool);
    const int year = 2010 + static_cast<int>(rng() % 14);
    const auto& q = quarter_end[rng() % 4];
    for (const auto& indicator : standard_indicators()) {
      const double amount = static_cast<double>(1000000 + rng() % 900000000000ULL);
      out.push_back({ymd(year, q[0], q[1]), company, ticker, indicator, amount});
    }
  }
  return out;
}

}  // namespace finrag::testing
