#include "core/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "core/text_util.hpp"
#include "json.hpp"

namespace finrag {
namespace {

using nlohmann::json;

constexpr std::size_t kExcerptChars = 80;

bool strip_prefix(std::string_view& s, std::string_view prefix) {
  if (s.substr(0, prefix.size()) != prefix) return false;
  s.remove_prefix(prefix.size());
  return true;
}

bool strip_currency(std::string_view& s) {
  return strip_prefix(s, "$") || strip_prefix(s, "\xE2\x82\xAC") ||  // €
         strip_prefix(s, "\xC2\xA3");                                 // £
}

// Parses a run of digits with an optional single '.', nothing else.
double parse_plain_decimal(std::string_view s, std::string_view raw) {
  auto malformed = [&] {
    fail(ErrorCode::kMalformedNumber,
         "malformed number '" + std::string(raw) + "'");
  };
  if (s.empty()) malformed();
  std::size_t digits = 0;
  std::size_t points = 0;
  for (char c : s) {
    if (c >= '0' && c <= '9') {
      ++digits;
    } else if (c == '.') {
      ++points;
    } else {
      malformed();
    }
  }
  if (digits == 0 || points > 1) malformed();
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value,
                                   std::chars_format::fixed);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value))
    malformed();
  return value;
}

int parse_int(std::string_view s) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return -1;
  return value;
}

bool all_digits(std::string_view s) {
  return !s.empty() &&
         std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    auto pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

bool in_supported_range(const Date& d) {
  using namespace std::chrono;
  return d.ok() && d >= year_month_day{year{1990}, January, day{1}} &&
         d <= year_month_day{year{2100}, December, day{31}};
}

Date make_date(int y, int m, int d) {
  return Date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
              std::chrono::day{static_cast<unsigned>(d)}};
}

[[noreturn]] void invalid_date(std::string_view raw) {
  fail(ErrorCode::kInvalidDate, "invalid date '" + std::string(raw) + "'");
}

Date checked(int y, int m, int d, std::string_view raw) {
  if (m < 1 || m > 12 || d < 1 || d > 31) invalid_date(raw);
  Date date = make_date(y, m, d);
  if (!in_supported_range(date)) invalid_date(raw);
  return date;
}

std::string excerpt(std::string_view raw) {
  std::string out(raw.substr(0, kExcerptChars));
  return out;
}

std::string json_scalar_text(const json& value) {
  switch (value.type()) {
    case json::value_t::string: return value.get<std::string>();
    case json::value_t::null: return "";
    case json::value_t::number_integer: return std::to_string(value.get<std::int64_t>());
    case json::value_t::number_unsigned: return std::to_string(value.get<std::uint64_t>());
    case json::value_t::number_float: return format_amount(value.get<double>());
    case json::value_t::boolean: return value.get<bool>() ? "true" : "false";
    default: return value.dump();
  }
}

RawRow row_from_json(const json& object) {
  if (!object.is_object())
    fail(ErrorCode::kInvalidArgument, "row is not a JSON object");
  RawRow row;
  for (const auto& [key, value] : object.items()) row[key] = json_scalar_text(value);
  return row;
}

// RFC 4180 style record splitting; returns false at end of input.
bool read_csv_record(std::istream& in, std::vector<std::string>& fields,
                     std::string& raw) {
  fields.clear();
  raw.clear();
  std::string field;
  bool in_quotes = false;
  bool any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (in_quotes) {
      raw.push_back(c);
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          raw.push_back(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '\r') continue;
    if (c == '\n') break;
    raw.push_back(c);
    if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  if (!any) return false;
  fields.push_back(std::move(field));
  return true;
}

class RowSink {
 public:
  void accept_row(std::size_t row_number, const RawRow& row, std::string_view raw) {
    ++result_.report.rows_read;
    try {
      result_.records.push_back(parse_record(row));
      ++result_.report.rows_accepted;
    } catch (const Error& e) {
      reject(row_number, e.code(), raw);
    }
  }

  void reject(std::size_t row_number, ErrorCode code, std::string_view raw) {
    ++result_.report.rows_rejected;
    result_.report.rejects.push_back(
        {row_number, std::string(error_code_name(code)), excerpt(raw)});
  }

  void reject_unparsed(std::size_t row_number, ErrorCode code, std::string_view raw) {
    ++result_.report.rows_read;
    reject(row_number, code, raw);
  }

  LoadResult take() { return std::move(result_); }

 private:
  LoadResult result_;
};

LoadResult load_json_lines(std::istream& in) {
  RowSink sink;
  std::string line;
  std::size_t row_number = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row_number;
    json object = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (object.is_discarded() || !object.is_object()) {
      sink.reject_unparsed(row_number, ErrorCode::kInvalidArgument, line);
      continue;
    }
    sink.accept_row(row_number, row_from_json(object), line);
  }
  if (in.bad()) fail(ErrorCode::kUnreadableSource, "read error");
  return sink.take();
}

LoadResult load_json_array(std::istream& in) {
  std::stringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) fail(ErrorCode::kUnreadableSource, "read error");
  std::string text = buffer.str();
  RowSink sink;
  if (trim(text).empty()) return sink.take();
  json doc = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_array())
    fail(ErrorCode::kUnreadableSource, "source is not a JSON array");
  std::size_t row_number = 0;
  for (const auto& element : doc) {
    ++row_number;
    std::string raw = element.dump();
    if (!element.is_object()) {
      sink.reject_unparsed(row_number, ErrorCode::kInvalidArgument, raw);
      continue;
    }
    sink.accept_row(row_number, row_from_json(element), raw);
  }
  return sink.take();
}

LoadResult load_csv(std::istream& in) {
  RowSink sink;
  std::vector<std::string> fields;
  std::string raw;
  std::vector<std::string> header;
  while (read_csv_record(in, fields, raw)) {
    if (trim(raw).empty()) continue;
    header = fields;
    break;
  }
  for (auto& name : header) name = std::string(trim(name));
  std::size_t row_number = 0;
  while (read_csv_record(in, fields, raw)) {
    if (trim(raw).empty()) continue;
    ++row_number;
    if (fields.size() != header.size()) {
      sink.reject_unparsed(row_number, ErrorCode::kInvalidArgument, raw);
      continue;
    }
    RawRow row;
    for (std::size_t i = 0; i < header.size(); ++i) row[header[i]] = fields[i];
    sink.accept_row(row_number, row, raw);
  }
  if (in.bad()) fail(ErrorCode::kUnreadableSource, "read error");
  return sink.take();
}

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

double parse_amount(std::string_view raw) {
  std::string_view s = trim(raw);
  if (s.empty()) fail(ErrorCode::kMissingValue, "missing amount");

  bool negative = false;
  if (s.size() >= 2 && s.front() == '(' && s.back() == ')') {
    negative = true;
    s = trim(s.substr(1, s.size() - 2));
  }
  // Sign may appear on either side of the currency symbol.
  auto take_sign = [&] {
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
      if (s.front() == '-') negative = !negative;
      s.remove_prefix(1);
      s = trim(s);
      return true;
    }
    return false;
  };
  bool signed_before = take_sign();
  if (strip_currency(s)) {
    s = trim(s);
    if (!signed_before) take_sign();
  }

  std::string digits;
  digits.reserve(s.size());
  for (char c : s)
    if (c != ',') digits.push_back(c);

  double value = parse_plain_decimal(digits, raw);
  return negative ? -value : value;
}

std::string format_amount(double amount) {
  char buffer[400];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), amount,
                                 std::chars_format::fixed);
  if (ec != std::errc()) fail(ErrorCode::kInternal, "amount formatting failed");
  return std::string(buffer, ptr);
}

Date normalize_date(std::string_view raw) {
  std::string_view s = trim(raw);
  if (s.empty()) invalid_date(raw);

  if (s.find('-') != std::string_view::npos) {
    auto parts = split(s, '-');
    if (parts.size() != 3 || parts[0].size() != 4 || !all_digits(parts[0]) ||
        !all_digits(parts[1]) || !all_digits(parts[2]) || parts[1].size() > 2 ||
        parts[2].size() > 2)
      invalid_date(raw);
    return checked(parse_int(parts[0]), parse_int(parts[1]), parse_int(parts[2]), raw);
  }

  auto parts = split(s, '/');
  if (parts.size() != 3) invalid_date(raw);
  for (auto p : parts)
    if (!all_digits(p)) invalid_date(raw);

  if (parts[0].size() == 4 && parts[1].size() <= 2 && parts[2].size() <= 2)
    return checked(parse_int(parts[0]), parse_int(parts[1]), parse_int(parts[2]), raw);

  if (parts[2].size() == 4 && parts[0].size() <= 2 && parts[1].size() <= 2) {
    const int y = parse_int(parts[2]);
    const int first = parse_int(parts[0]);
    const int second = parse_int(parts[1]);
    auto valid = [&](int m, int d) {
      return m >= 1 && m <= 12 && d >= 1 && d <= 31 &&
             in_supported_range(make_date(y, m, d));
    };
    const bool month_first = valid(first, second);
    const bool day_first = valid(second, first);
    if (month_first && day_first && first != second)
      fail(ErrorCode::kAmbiguousDate, "ambiguous date '" + std::string(raw) + "'");
    if (!month_first) invalid_date(raw);
    return make_date(y, first, second);
  }
  invalid_date(raw);
}

std::string format_date(const Date& date) {
  char buffer[16];
  std::snprintf(buffer, sizeof(buffer), "%04d-%02u-%02u", static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
  return buffer;
}

FinRecord parse_record(const RawRow& row) {
  std::unordered_map<std::string, const std::string*> fields;
  for (const auto& [key, value] : row) fields[to_lower(trim(key))] = &value;
  if (!fields.count("tickers") && fields.count("ticker"))
    fields["tickers"] = fields["ticker"];

  auto field = [&](const char* name) -> const std::string& {
    auto it = fields.find(name);
    if (it == fields.end())
      fail(ErrorCode::kMissingField, std::string("missing field '") + name + "'");
    return *it->second;
  };

  // Checked up front so a missing column is reported before value errors.
  for (const char* name : {"period", "company", "tickers", "indicator", "amount"})
    field(name);

  FinRecord record;
  record.period = normalize_date(field("period"));

  record.company = std::string(trim(field("company")));
  if (record.company.empty()) fail(ErrorCode::kMissingValue, "missing company");

  record.ticker = to_upper(trim(field("tickers")));
  if (record.ticker.empty()) fail(ErrorCode::kMissingValue, "missing ticker");
  if (record.ticker.size() > 6 ||
      !std::all_of(record.ticker.begin(), record.ticker.end(), [](char c) {
        return (c >= 'A' && c <= 'Z') || c == '.' || c == '-';
      }))
    fail(ErrorCode::kInvalidArgument, "invalid ticker '" + record.ticker + "'");

  record.indicator = collapse_whitespace(field("indicator"));
  if (record.indicator.empty()) fail(ErrorCode::kMissingValue, "missing indicator");

  record.amount = parse_amount(field("amount"));
  return record;
}

DatasetFormat format_from_name(std::string_view name) {
  std::string n = to_lower(name);
  if (n == "json-lines" || n == "jsonl" || n == "ndjson") return DatasetFormat::kJsonLines;
  if (n == "json-array" || n == "json") return DatasetFormat::kJsonArray;
  if (n == "csv" || n == "csv-with-header") return DatasetFormat::kCsv;
  fail(ErrorCode::kUnknownFormat, "unknown dataset format '" + std::string(name) + "'");
}

DatasetFormat format_from_path(std::string_view path) {
  auto dot = path.rfind('.');
  if (dot == std::string_view::npos)
    fail(ErrorCode::kUnknownFormat, "cannot infer format of '" + std::string(path) + "'");
  std::string ext = to_lower(path.substr(dot + 1));
  if (ext == "jsonl" || ext == "ndjson") return DatasetFormat::kJsonLines;
  if (ext == "json") return DatasetFormat::kJsonArray;
  if (ext == "csv") return DatasetFormat::kCsv;
  fail(ErrorCode::kUnknownFormat, "cannot infer format of '" + std::string(path) + "'");
}

LoadResult load_dataset(std::istream& source, DatasetFormat format) {
  if (!source) fail(ErrorCode::kUnreadableSource, "source is not readable");
  switch (format) {
    case DatasetFormat::kJsonLines: return load_json_lines(source);
    case DatasetFormat::kJsonArray: return load_json_array(source);
    case DatasetFormat::kCsv: return load_csv(source);
  }
  fail(ErrorCode::kUnknownFormat, "unknown dataset format");
}

LoadResult load_dataset_file(const std::string& path, DatasetFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kUnreadableSource, "cannot open '" + path + "'");
  return load_dataset(in, format);
}

std::vector<std::size_t> find_outliers(const std::vector<FinRecord>& records) {
  std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> series;
  for (std::size_t i = 0; i < records.size(); ++i)
    series[{records[i].ticker, records[i].indicator}].push_back(i);

  std::vector<std::size_t> flagged;
  for (const auto& [key, members] : series) {
    std::vector<double> values;
    values.reserve(members.size());
    for (auto i : members) values.push_back(records[i].amount);
    const double median = median_of(values);

    std::vector<double> deviations;
    deviations.reserve(values.size());
    for (double v : values) deviations.push_back(std::fabs(v - median));
    // 1.4826 * MAD estimates sigma for normal data; when more than half the
    // series is identical the MAD is 0 and the mean absolute deviation
    // (scaled by sqrt(pi/2)) takes its place.
    double scale = 1.4826 * median_of(deviations);
    if (scale == 0.0) {
      double sum = 0.0;
      for (double d : deviations) sum += d;
      scale = 1.2533 * sum / static_cast<double>(deviations.size());
    }
    if (scale == 0.0) continue;
    for (std::size_t j = 0; j < members.size(); ++j)
      if (std::fabs(values[j] - median) / scale > kOutlierZThreshold)
        flagged.push_back(members[j]);
  }
  std::sort(flagged.begin(), flagged.end());
  return flagged;
}

LoadResult clean_dataset(std::vector<FinRecord> records) {
  LoadResult result;
  result.report.rows_read = records.size();
  result.report.rows_accepted = records.size();

  struct Key {
    int days;
    std::string ticker;
    std::string indicator;
    bool operator<(const Key& o) const {
      return std::tie(days, ticker, indicator) < std::tie(o.days, o.ticker, o.indicator);
    }
  };
  std::map<Key, std::size_t> slot_of;
  std::vector<bool> alive;
  std::vector<FinRecord> kept;
  kept.reserve(records.size());
  for (auto& record : records) {
    Key key{static_cast<int>(std::chrono::sys_days(record.period).time_since_epoch().count()),
            record.ticker, record.indicator};
    auto it = slot_of.find(key);
    if (it != slot_of.end()) {
      ++result.report.duplicates_dropped;
      if (kept[it->second].amount == record.amount) continue;
      alive[it->second] = false;  // conflicting value: last occurrence wins
    }
    slot_of[key] = kept.size();
    kept.push_back(std::move(record));
    alive.push_back(true);
  }
  for (std::size_t i = 0; i < kept.size(); ++i)
    if (alive[i]) result.records.push_back(std::move(kept[i]));

  result.report.outliers_flagged = find_outliers(result.records).size();
  return result;
}

std::string record_to_json_line(const FinRecord& record) {
  std::string line = "{\"period\":";
  line += json(format_date(record.period)).dump();
  line += ",\"company\":" + json(record.company).dump();
  line += ",\"tickers\":" + json(record.ticker).dump();
  line += ",\"indicator\":" + json(record.indicator).dump();
  line += ",\"amount\":" + format_amount(record.amount) + "}";
  return line;
}

std::string report_to_json(const NormalizationReport& report) {
  json rejects = json::array();
  for (const auto& r : report.rejects)
    rejects.push_back({{"row", r.row}, {"code", r.code}, {"excerpt", r.excerpt}});
  json doc = {{"rows_read", report.rows_read},
              {"rows_accepted", report.rows_accepted},
              {"rows_rejected", report.rows_rejected},
              {"duplicates_dropped", report.duplicates_dropped},
              {"outliers_flagged", report.outliers_flagged},
              {"rejects", rejects}};
  return doc.dump();
}

}  // namespace finrag
