#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "core/docbuild.hpp"
#include "core/llmgateway.hpp"
#include "doctest.h"
#include "support/fixtures.hpp"

using namespace finrag;
using finrag::testing::apple_revenue;
using finrag::testing::ymd;

TEST_CASE("single record renders the reference passage") {
  auto passages = build_passages({apple_revenue()});
  REQUIRE(passages.size() == 1);
  const auto& p = passages[0];
  CHECK(p.id == "AAPL:2023-03-31");
  CHECK(p.ticker == "AAPL");
  CHECK(p.company == "Apple Inc.");
  CHECK(p.period == ymd(2023, 3, 31));
  CHECK(p.text ==
        "For the quarter ending 2023-03-31, Apple Inc. (AAPL) reported Revenue of 100000000 USD.");
  CHECK(p.facts == std::vector<Fact>{{"Revenue", 100000000.0}});
  CHECK(!p.truncated);
}

TEST_CASE("empty input yields no passages") { CHECK(build_passages({}).empty()); }

TEST_CASE("facts group by ticker and period with stable ordering") {
  auto a = apple_revenue();
  auto b = apple_revenue();
  b.indicator = "Assets";
  b.amount = 5.0;
  auto c = apple_revenue();
  c.indicator = "NetIncome";
  c.amount = 7.5;
  FinRecord m{ymd(2023, 3, 31), "Microsoft Corp.", "MSFT", "Revenue", 2.0};
  auto passages = build_passages({a, m, b, c});
  REQUIRE(passages.size() == 2);
  CHECK(passages[0].id == "AAPL:2023-03-31");
  CHECK(passages[1].id == "MSFT:2023-03-31");
  CHECK(passages[0].text ==
        "For the quarter ending 2023-03-31, Apple Inc. (AAPL) reported Assets of 5 USD; "
        "NetIncome of 7.5 USD; Revenue of 100000000 USD.");
  CHECK(passages[1].facts.size() == 1);
}

TEST_CASE("conflicting company names are rejected") {
  auto other = apple_revenue();
  other.company = "Apple Computer";
  other.indicator = "Assets";
  try {
    build_passages({apple_revenue(), other});
    FAIL("expected ConflictingCompanyName");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kConflictingCompanyName);
  }
}

TEST_CASE("oversized passages are truncated to the token ceiling") {
  std::vector<FinRecord> records;
  for (int i = 0; i < 200; ++i) {
    auto r = apple_revenue();
    r.indicator = "Indicator" + std::to_string(1000 + i);
    r.amount = 123456789.0 + i;
    records.push_back(r);
  }
  auto passages = build_passages(records);
  REQUIRE(passages.size() == 1);
  CHECK(passages[0].truncated);
  CHECK(estimate_tokens(passages[0].text) <= kMaxSequenceTokens);
  CHECK(passages[0].facts.size() == 200);  // facts are kept in full for scoring

  auto small = build_passages({apple_revenue()}, 8);
  CHECK(small[0].truncated);
  CHECK(small[0].text.size() == 32);
}

TEST_CASE("truncation never splits a UTF-8 sequence") {
  auto r = apple_revenue();
  r.company = std::string(200, 'x') + "\xC3\xA9\xC3\xA9\xC3\xA9";
  for (std::size_t budget = 50; budget < 60; ++budget) {
    auto p = build_passages({r}, budget)[0];
    CHECK(estimate_tokens(p.text) <= budget);
    // Valid UTF-8: the last byte is never a dangling lead byte.
    const unsigned char last = static_cast<unsigned char>(p.text.back());
    CHECK((last < 0x80 || (last & 0xC0) == 0x80));
  }
}

TEST_CASE("passage building is permutation invariant and conserves facts") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    auto records = finrag::testing::synthetic_company_records(1 + rng() % 20, 0, rng());
    // A second quarter for some companies, to exercise grouping.
    const std::size_t n = records.size();
    for (std::size_t i = 0; i < n; i += 3) {
      auto r = records[i];
      r.period = ymd(2024, 6, 30);
      records.push_back(r);
    }
    auto reference = build_passages(records);
    std::shuffle(records.begin(), records.end(), rng);
    CHECK(build_passages(records) == reference);

    std::size_t fact_count = 0;
    std::set<std::string> ids;
    for (const auto& p : reference) {
      fact_count += p.facts.size();
      ids.insert(p.id);
      CHECK(std::is_sorted(p.facts.begin(), p.facts.end(), [](const Fact& a, const Fact& b) {
        return a.indicator < b.indicator;
      }));
    }
    CHECK(fact_count == records.size());
    CHECK(ids.size() == reference.size());
  }
}

TEST_CASE("passage JSON lines round trip") {
  auto passages = build_passages(finrag::testing::synthetic_company_records(12, 1, 4));
  std::stringstream stream;
  for (const auto& p : passages) stream << passage_to_json_line(p) << "\n";
  CHECK(read_passages(stream) == passages);
  try {
    passage_from_json_line("{\"id\":1}");
    FAIL("expected failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidArgument);
  }
}
