#pragma once

#include <cstddef>
#include <istream>
#include <string>
#include <vector>

#include "core/ingest.hpp"

namespace finrag {

inline constexpr std::size_t kMaxSequenceTokens = 512;

struct Fact {
  std::string indicator;
  double amount = 0.0;

  friend bool operator==(const Fact&, const Fact&) = default;
};

/// One (ticker, quarter) snapshot. id is "<ticker>:<ISO period>".
struct Passage {
  std::string id;
  std::string ticker;
  std::string company;
  Date period;
  std::string text;
  std::vector<Fact> facts;  // sorted by indicator
  bool truncated = false;

  friend bool operator==(const Passage&, const Passage&) = default;
};

std::string passage_id(std::string_view ticker, const Date& period);

struct RenderedPassage {
  std::string text;
  bool truncated = false;
};

RenderedPassage render_passage(const std::string& company, const std::string& ticker,
                               const Date& period, const std::vector<Fact>& facts,
                               std::size_t max_tokens = kMaxSequenceTokens);

// One passage per (ticker, period), sorted by (ticker, period). Input order
// does not affect the output.
std::vector<Passage> build_passages(const std::vector<FinRecord>& records,
                                    std::size_t max_tokens = kMaxSequenceTokens);

std::string passage_to_json_line(const Passage& passage);
Passage passage_from_json_line(const std::string& line);
std::vector<Passage> read_passages(std::istream& in);

}  // namespace finrag
