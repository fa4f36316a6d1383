#include "core/evalbench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <random>
#include <thread>
#include <tuple>

#include "core/text_util.hpp"
#include "json.hpp"

namespace finrag {
namespace {

using nlohmann::json;

// Unbiased draw in [0, bound) from the raw engine output. std::mt19937_64's
// sequence is fixed by the standard, unlike the distribution classes.
std::uint64_t bounded(std::mt19937_64& engine, std::uint64_t bound) {
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = engine();
    if (r >= threshold) return r % bound;
  }
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool is_alnum(char c) {
  return is_digit(c) || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

// Length of a currency symbol ending right before `pos`, or 0.
std::size_t currency_before(std::string_view s, std::size_t pos) {
  if (pos >= 1 && s[pos - 1] == '$') return 1;
  if (pos >= 2 && s.substr(pos - 2, 2) == "\xC2\xA3") return 2;
  if (pos >= 3 && s.substr(pos - 3, 3) == "\xE2\x82\xAC") return 3;
  return 0;
}

double magnitude_suffix(std::string_view s, std::size_t& pos) {
  std::size_t p = pos;
  while (p < s.size() && (s[p] == ' ' || s[p] == '\t')) ++p;
  static constexpr std::pair<std::string_view, double> kSuffixes[] = {
      {"thousand", 1e3}, {"million", 1e6}, {"billion", 1e9}, {"trillion", 1e12}};
  for (const auto& [word, scale] : kSuffixes) {
    if (p + word.size() > s.size()) continue;
    if (to_lower(s.substr(p, word.size())) != word) continue;
    const std::size_t end = p + word.size();
    if (end < s.size() && is_alnum(s[end])) continue;
    pos = end;
    return scale;
  }
  return 1.0;
}

}  // namespace

std::string question_for(std::string_view company, std::string_view indicator,
                         const Date& period) {
  return "What was " + std::string(company) + "'s " + std::string(indicator) +
         " for the quarter ending " + format_date(period) + "?";
}

std::vector<QAItem> synthesize_qa(const std::vector<FinRecord>& records, std::size_t n,
                                  std::uint64_t seed) {
  if (n == 0) fail(ErrorCode::kInvalidArgument, "n must be >= 1");
  using Key = std::tuple<std::string, int, std::string>;
  std::map<Key, const FinRecord*> facts;
  for (const auto& r : records) {
    const int days = std::chrono::sys_days(r.period).time_since_epoch().count();
    facts[{r.ticker, days, r.indicator}] = &r;
  }
  if (facts.size() < n)
    fail(ErrorCode::kInsufficientFacts, "requested " + std::to_string(n) + " items but only " +
                                            std::to_string(facts.size()) + " distinct facts exist");

  std::vector<const FinRecord*> pool;
  pool.reserve(facts.size());
  for (const auto& [key, record] : facts) pool.push_back(record);

  std::mt19937_64 engine(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + bounded(engine, pool.size() - i);
    std::swap(pool[i], pool[j]);
  }

  std::vector<QAItem> items;
  items.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const FinRecord& r = *pool[i];
    char id[32];
    std::snprintf(id, sizeof(id), "qa-%04zu", i + 1);
    QAItem item;
    item.id = id;
    item.question = question_for(r.company, r.indicator, r.period);
    item.gold_answer = r.amount;
    item.gold_facts = {{r.indicator, r.amount}};
    item.gold_passage_id = passage_id(r.ticker, r.period);
    item.company = r.company;
    item.ticker = r.ticker;
    item.period = r.period;
    item.indicator = r.indicator;
    items.push_back(std::move(item));
  }
  return items;
}

std::vector<double> extract_numbers(std::string_view s) {
  std::vector<double> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const bool starts = is_digit(s[i]) || (s[i] == '.' && i + 1 < s.size() && is_digit(s[i + 1]));
    if (!starts || (i > 0 && (is_alnum(s[i - 1]) || s[i - 1] == '.'))) {
      ++i;
      continue;
    }
    const std::size_t begin = i;
    std::string digits;
    bool seen_point = false;
    while (i < s.size()) {
      const char c = s[i];
      if (is_digit(c)) {
        digits.push_back(c);
      } else if (c == ',' && i + 1 < s.size() && is_digit(s[i + 1]) && !seen_point) {
        // thousands separator
      } else if (c == '.' && !seen_point && i + 1 < s.size() && is_digit(s[i + 1])) {
        seen_point = true;
        digits.push_back(c);
      } else {
        break;
      }
      ++i;
    }
    double value = std::strtod(digits.c_str(), nullptr);

    std::size_t lead = begin - currency_before(s, begin);
    bool negative = false;
    if (lead >= 1 && s[lead - 1] == '-' && (lead == 1 || !is_alnum(s[lead - 2]))) {
      negative = true;
      --lead;
    }
    value *= magnitude_suffix(s, i);
    if (!negative && lead >= 1 && s[lead - 1] == '(' && i < s.size() && s[i] == ')')
      negative = true;
    out.push_back(negative ? -value : value);
  }
  return out;
}

bool judge_answer(std::string_view answer, double gold) {
  for (double v : extract_numbers(answer)) {
    if (gold == 0.0 ? v == 0.0 : std::fabs(v - gold) <= 1e-6 * std::fabs(gold)) return true;
  }
  return false;
}

std::vector<GroupConfig> standard_groups(const ModelProfile& base, const ModelProfile& enhanced) {
  return {{"BG", base, false}, {"REG", base, true}, {"VUG", enhanced, false}, {"FOG", enhanced, true}};
}

std::vector<GroupConfig> parse_groups(std::string_view spec, const ModelProfile& base,
                                      const ModelProfile& enhanced) {
  const auto standard = standard_groups(base, enhanced);
  std::vector<GroupConfig> out;
  std::size_t start = 0;
  while (start <= spec.size()) {
    auto comma = spec.find(',', start);
    auto name = trim(spec.substr(start, comma == std::string_view::npos ? comma : comma - start));
    start = comma == std::string_view::npos ? spec.size() + 1 : comma + 1;
    if (name.empty()) continue;

    constexpr std::string_view kCustom = "custom:";
    if (name.substr(0, kCustom.size()) == kCustom) {
      auto model = name.substr(kCustom.size());
      GroupConfig g;
      g.name = std::string(name);
      constexpr std::string_view kRag = "+rag";
      if (model.size() > kRag.size() && model.substr(model.size() - kRag.size()) == kRag) {
        g.rag = true;
        model.remove_suffix(kRag.size());
      }
      if (model.empty()) fail(ErrorCode::kUnknownGroup, "custom group needs a model name");
      g.model = base;
      g.model.name = std::string(model);
      out.push_back(std::move(g));
      continue;
    }
    auto it = std::find_if(standard.begin(), standard.end(),
                           [&](const GroupConfig& g) { return g.name == to_upper(name); });
    if (it == standard.end())
      fail(ErrorCode::kUnknownGroup, "unknown group '" + std::string(name) +
                                         "'; valid groups: BG, REG, VUG, FOG, custom:<model>[+rag]");
    out.push_back(*it);
  }
  if (out.empty()) fail(ErrorCode::kUnknownGroup, "no groups given; valid groups: BG, REG, VUG, FOG");
  return out;
}

double nearest_rank_percentile(std::vector<double> values, double p) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(values.size())));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

GroupMetrics compute_metrics(const std::vector<QAItem>& items,
                             const std::vector<QueryResult>& results) {
  if (items.size() != results.size())
    fail(ErrorCode::kLengthMismatch, std::to_string(items.size()) + " items but " +
                                         std::to_string(results.size()) + " results");
  GroupMetrics m;
  m.items = items.size();
  if (items.empty()) return m;

  std::size_t correct = 0;
  std::size_t facts_total = 0;
  std::size_t facts_found = 0;
  std::size_t retrieved = 0;
  bool any_rag = false;
  std::vector<double> latencies;
  latencies.reserve(items.size());
  double latency_sum = 0.0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& item = items[i];
    const auto& result = results[i];
    if (judge_answer(result.answer, item.gold_answer)) ++correct;
    for (const auto& fact : item.gold_facts) {
      ++facts_total;
      if (judge_answer(result.answer, fact.amount)) ++facts_found;
    }
    if (result.mode == QueryMode::kRag) {
      any_rag = true;
      for (const auto& hit : result.retrieved)
        if (hit.id == item.gold_passage_id) {
          ++retrieved;
          break;
        }
    }
    latencies.push_back(result.latency.total_ms);
    latency_sum += result.latency.total_ms;
  }
  const double n = static_cast<double>(items.size());
  m.accuracy = static_cast<double>(correct) / n;
  m.answer_fact_recall =
      facts_total ? static_cast<double>(facts_found) / static_cast<double>(facts_total) : 0.0;
  if (any_rag) m.retrieval_recall = static_cast<double>(retrieved) / n;
  m.rag = any_rag;
  m.latency_ms.mean = latency_sum / n;
  m.latency_ms.p50 = nearest_rank_percentile(latencies, 50);
  m.latency_ms.p95 = nearest_rank_percentile(std::move(latencies), 95);
  return m;
}

EvalReport run_groups(const std::vector<GroupConfig>& groups, const std::vector<QAItem>& items,
                      std::shared_ptr<const Corpus> corpus,
                      std::shared_ptr<const Embedder> embedder,
                      const CompleterFactory& completer_for, const EvalOptions& options) {
  if (groups.empty()) fail(ErrorCode::kInvalidArgument, "no groups to run");
  EvalReport report;
  report.item_count = items.size();
  report.seed = options.seed;
  report.k = options.pipeline.k;
  report.context_budget = options.pipeline.context_budget;

  for (const auto& group : groups) {
    if (group.rag && (!corpus || !embedder))
      fail(ErrorCode::kConfig, "group " + group.name + " needs an index and an embedder");
    RagPipeline pipeline(corpus, embedder, completer_for(group), options.pipeline);
    const QueryMode mode = group.rag ? QueryMode::kRag : QueryMode::kBaseline;

    std::vector<QueryResult> results(items.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= items.size()) return;
        try {
          results[i] = pipeline.answer_query(items[i].question, mode);
        } catch (const Error& e) {
          std::lock_guard lock(error_mutex);
          if (!first_error)
            first_error = std::make_exception_ptr(
                Error(e.code(), "group " + group.name + ", item " + items[i].id + ": " + e.what()));
          return;
        }
      }
    };
    const std::size_t workers = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::max(options.max_in_flight, 1)), 1,
        std::max<std::size_t>(items.size(), 1));
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
      worker();
    }
    if (first_error) std::rethrow_exception(first_error);

    GroupMetrics metrics = compute_metrics(items, results);
    metrics.name = group.name;
    metrics.model = group.model.name;
    metrics.rag = group.rag;
    if (group.rag && !metrics.retrieval_recall) metrics.retrieval_recall = 0.0;
    report.groups.push_back(std::move(metrics));
  }

  auto bg = std::find_if(report.groups.begin(), report.groups.end(),
                         [](const GroupMetrics& g) { return g.name == "BG"; });
  if (bg != report.groups.end()) {
    for (const auto& g : report.groups) {
      if (g.name == "BG") continue;
      GroupDelta d;
      d.group = g.name;
      d.accuracy_points = (g.accuracy - bg->accuracy) * 100.0;
      d.answer_fact_recall_points = (g.answer_fact_recall - bg->answer_fact_recall) * 100.0;
      if (bg->latency_ms.p50 > 0.0)
        d.latency_change_pct = (g.latency_ms.p50 - bg->latency_ms.p50) / bg->latency_ms.p50 * 100.0;
      report.deltas_vs_bg.push_back(std::move(d));
    }
  }
  return report;
}

std::string eval_report_to_json(const EvalReport& report) {
  json groups = json::array();
  for (const auto& g : report.groups) {
    groups.push_back({{"name", g.name},
                      {"model", g.model},
                      {"rag", g.rag},
                      {"items", g.items},
                      {"accuracy", g.accuracy},
                      {"answer_fact_recall", g.answer_fact_recall},
                      {"retrieval_recall", g.retrieval_recall ? json(*g.retrieval_recall) : json()},
                      {"latency_ms",
                       {{"p50", g.latency_ms.p50}, {"p95", g.latency_ms.p95}, {"mean", g.latency_ms.mean}}}});
  }
  json deltas = json::array();
  for (const auto& d : report.deltas_vs_bg) {
    deltas.push_back({{"group", d.group},
                      {"accuracy_points", d.accuracy_points},
                      {"answer_fact_recall_points", d.answer_fact_recall_points},
                      {"latency_change_pct", d.latency_change_pct ? json(*d.latency_change_pct) : json()}});
  }
  json doc = {{"config",
               {{"items", report.item_count},
                {"seed", report.seed},
                {"k", report.k},
                {"context_budget", report.context_budget}}},
              {"groups", groups},
              {"deltas_vs_bg", deltas}};
  return doc.dump(2) + "\n";
}

std::string eval_report_to_table(const EvalReport& report) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-28s %-22s %9s %9s %10s %16s\n", "Group", "Model",
                "Accuracy", "Recall", "Retrieval", "Latency p50 ms");
  out += line;
  for (const auto& g : report.groups) {
    char retrieval[16] = "n/a";
    if (g.retrieval_recall) std::snprintf(retrieval, sizeof(retrieval), "%.1f%%", *g.retrieval_recall * 100);
    std::snprintf(line, sizeof(line), "%-28s %-22s %8.1f%% %8.1f%% %10s %16.3f\n", g.name.c_str(),
                  g.model.c_str(), g.accuracy * 100, g.answer_fact_recall * 100, retrieval,
                  g.latency_ms.p50);
    out += line;
  }
  return out;
}

}  // namespace finrag
