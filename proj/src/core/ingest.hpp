#pragma once

#include <chrono>
#include <cstddef>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "core/error.hpp"

namespace finrag {

using Date = std::chrono::year_month_day;

/// One normalized financial fact, keyed by (period, ticker, indicator).
struct FinRecord {
  Date period;
  std::string company;
  std::string ticker;
  std::string indicator;
  double amount = 0.0;

  friend bool operator==(const FinRecord&, const FinRecord&) = default;
};

struct RejectedRow {
  std::size_t row = 0;  // 1-based data row number
  std::string code;
  std::string excerpt;

  friend bool operator==(const RejectedRow&, const RejectedRow&) = default;
};

/// Audit of a load or clean pass. rows_read == rows_accepted + rows_rejected.
struct NormalizationReport {
  std::size_t rows_read = 0;
  std::size_t rows_accepted = 0;
  std::size_t rows_rejected = 0;
  std::vector<RejectedRow> rejects;
  std::size_t duplicates_dropped = 0;
  std::size_t outliers_flagged = 0;

  friend bool operator==(const NormalizationReport&,
                         const NormalizationReport&) = default;
};

enum class DatasetFormat { kJsonLines, kJsonArray, kCsv };

// Strips a currency symbol, thousands separators and whitespace. "(x)" is -x.
double parse_amount(std::string_view raw);

// Shortest plain-decimal rendering that parses back to the same double.
std::string format_amount(double amount);

// Accepts YYYY/M/D, YYYY-MM-DD and MM/DD/YYYY within [1990-01-01, 2100-12-31].
Date normalize_date(std::string_view raw);
std::string format_date(const Date& date);

using RawRow = std::map<std::string, std::string>;

FinRecord parse_record(const RawRow& row);

DatasetFormat format_from_name(std::string_view name);
DatasetFormat format_from_path(std::string_view path);

struct LoadResult {
  std::vector<FinRecord> records;
  NormalizationReport report;
};

LoadResult load_dataset(std::istream& source, DatasetFormat format);
LoadResult load_dataset_file(const std::string& path, DatasetFormat format);

/// Deduplicates on (period, ticker, indicator) and flags robust-z outliers
/// per (ticker, indicator) series without removing them.
LoadResult clean_dataset(std::vector<FinRecord> records);

// Records flagged by the outlier rule; exposed for reporting and tests.
std::vector<std::size_t> find_outliers(const std::vector<FinRecord>& records);

inline constexpr double kOutlierZThreshold = 6.0;

std::string record_to_json_line(const FinRecord& record);
std::string report_to_json(const NormalizationReport& report);

}  // namespace finrag
