#pragma once

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace lifetail {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Event codes, following the usual survival conventions.
enum class Event : int {
  right_censored = 0,   // survived past time1
  observed = 1,         // exact failure at time1 == time2
  left_censored = 2,    // failed before time2
  interval_censored = 3 // failed in (time1, time2]
};

/// One lifetime observation with its censoring interval, truncation
/// window(s) and weight. Missing bounds are stored as explicit +-inf so
/// downstream formulas are total.
struct LifetimeRecord {
  double time1 = 0.0;
  double time2 = 0.0;
  Event event = Event::observed;
  double ltrunc1 = -kInf;
  double rtrunc1 = kInf;
  // Optional second truncation window for double interval truncation,
  // disjoint from and above the first one.
  double ltrunc2 = kInf;
  double rtrunc2 = kInf;
  double weight = 1.0;

  bool has_second_window() const { return ltrunc2 < kInf; }
  bool truncated() const {
    return ltrunc1 > 0.0 || rtrunc1 < kInf || has_second_window();
  }
};

struct Dataset {
  std::vector<LifetimeRecord> records;
  std::string unit;
  std::string provenance;

  double total_weight() const;
  bool empty() const { return records.empty(); }
  std::size_t size() const { return records.size(); }
};

/// Peaks-over-threshold configuration: the threshold u.
struct ExceedanceConfig {
  double thresh = 0.0;
};

/// Raw field mapping for one observation, prior to validation.
struct RawRecord {
  double time1 = 0.0;
  double time2 = std::numeric_limits<double>::quiet_NaN();
  std::optional<int> event;
  double ltrunc1 = -kInf;
  double rtrunc1 = kInf;
  double ltrunc2 = kInf;
  double rtrunc2 = kInf;
  double weight = 1.0;
};

/// Validate a raw record against the LifetimeRecord invariants.
/// Infers event = observed when time1 == time2 and no explicit code is
/// given, interval_censored when time1 < time2.
LifetimeRecord validate_record(const RawRecord& raw);

/// Maps canonical column names {time, time2, event, ltrunc, rtrunc,
/// ltrunc2, rtrunc2, weight} to the file's column headers. Unmapped
/// names use the canonical name itself.
using CsvSchema = std::map<std::string, std::string>;

/// Load a CSV file (UTF-8, comma separated, header row) into a Dataset.
/// Cells "inf"/"-inf" or empty denote missing bounds. Rows that fail
/// validation raise ParseError naming the row.
Dataset load_csv(const std::string& path, const CsvSchema& schema = {});

/// As load_csv, but splits records by the value of a label column, in
/// order of first appearance. Throws ParseError when the column is
/// missing.
std::vector<std::pair<std::string, Dataset>> load_csv_grouped(
    const std::string& path, const CsvSchema& schema, const std::string& group_column);

/// Shift a dataset to exceedances above cfg.thresh, dropping records
/// whose failure cannot exceed the threshold. Records whose censoring
/// interval straddles the threshold are rejected, as their exceedance
/// status is ambiguous.
Dataset to_exceedances(const Dataset& d, const ExceedanceConfig& cfg);

}  // namespace lifetail
