#include "core/docbuild.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include "core/llmgateway.hpp"
#include "core/text_util.hpp"
#include "json.hpp"

namespace finrag {

using nlohmann::json;

std::string passage_id(std::string_view ticker, const Date& period) {
  return std::string(ticker) + ":" + format_date(period);
}

RenderedPassage render_passage(const std::string& company, const std::string& ticker,
                               const Date& period, const std::vector<Fact>& facts,
                               std::size_t max_tokens) {
  if (facts.empty()) fail(ErrorCode::kInvalidArgument, "passage needs at least one fact");
  std::string text = "For the quarter ending " + format_date(period) + ", " + company +
                     " (" + ticker + ") reported ";
  for (std::size_t i = 0; i < facts.size(); ++i) {
    if (i > 0) text += "; ";
    text += facts[i].indicator + " of " + format_amount(facts[i].amount) + " USD";
  }
  text += ".";

  RenderedPassage out;
  if (estimate_tokens(text) > max_tokens) {
    text.resize(utf8_prefix_bytes(text, max_tokens * 4));
    out.truncated = true;
  }
  out.text = std::move(text);
  return out;
}

std::vector<Passage> build_passages(const std::vector<FinRecord>& records,
                                    std::size_t max_tokens) {
  struct Group {
    std::string company;
    std::vector<Fact> facts;
  };
  std::map<std::pair<std::string, int>, Group> groups;
  for (const auto& r : records) {
    const int days = std::chrono::sys_days(r.period).time_since_epoch().count();
    auto [it, inserted] = groups.try_emplace({r.ticker, days});
    Group& g = it->second;
    if (inserted) {
      g.company = r.company;
    } else if (g.company != r.company) {
      fail(ErrorCode::kConflictingCompanyName,
           passage_id(r.ticker, r.period) + " maps to both '" + g.company + "' and '" +
               r.company + "'");
    }
    g.facts.push_back({r.indicator, r.amount});
  }

  std::vector<Passage> passages;
  passages.reserve(groups.size());
  for (auto& [key, group] : groups) {
    std::sort(group.facts.begin(), group.facts.end(), [](const Fact& a, const Fact& b) {
      return std::tie(a.indicator, a.amount) < std::tie(b.indicator, b.amount);
    });
    Passage p;
    p.ticker = key.first;
    p.period = Date{std::chrono::sys_days{std::chrono::days{key.second}}};
    p.id = passage_id(p.ticker, p.period);
    p.company = group.company;
    auto rendered = render_passage(p.company, p.ticker, p.period, group.facts, max_tokens);
    p.text = std::move(rendered.text);
    p.truncated = rendered.truncated;
    p.facts = std::move(group.facts);
    passages.push_back(std::move(p));
  }
  return passages;
}

std::string passage_to_json_line(const Passage& p) {
  json facts = json::array();
  for (const auto& f : p.facts) facts.push_back({{"indicator", f.indicator}, {"amount", f.amount}});
  json doc = {{"id", p.id},     {"ticker", p.ticker}, {"company", p.company},
              {"period", format_date(p.period)},     {"text", p.text},
              {"facts", facts}, {"truncated", p.truncated}};
  return doc.dump();
}

Passage passage_from_json_line(const std::string& line) {
  json doc = json::parse(line, nullptr, false);
  if (doc.is_discarded() || !doc.is_object())
    fail(ErrorCode::kInvalidArgument, "malformed passage line");
  try {
    Passage p;
    p.id = doc.at("id").get<std::string>();
    p.ticker = doc.at("ticker").get<std::string>();
    p.company = doc.value("company", "");
    p.period = normalize_date(doc.at("period").get<std::string>());
    p.text = doc.at("text").get<std::string>();
    p.truncated = doc.value("truncated", false);
    for (const auto& f : doc.at("facts"))
      p.facts.push_back({f.at("indicator").get<std::string>(), f.at("amount").get<double>()});
    return p;
  } catch (const json::exception& e) {
    fail(ErrorCode::kInvalidArgument, std::string("malformed passage line: ") + e.what());
  }
}

std::vector<Passage> read_passages(std::istream& in) {
  std::vector<Passage> out;
  std::string line;
  while (std::getline(in, line))
    if (!trim(line).empty()) out.push_back(passage_from_json_line(line));
  return out;
}

}  // namespace finrag
