#include "lifetail/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "lifetail/errors.hpp"

namespace lifetail {

double Dataset::total_weight() const {
  double w = 0.0;
  for (const auto& r : records) w += r.weight;
  return w;
}

namespace {

bool in_window(double t1, double t2, double lo, double hi) {
  return lo <= t1 && t2 <= hi;
}

}  // namespace

LifetimeRecord validate_record(const RawRecord& raw) {
  LifetimeRecord rec;
  rec.time1 = raw.time1;
  rec.time2 = std::isnan(raw.time2) ? raw.time1 : raw.time2;
  rec.ltrunc1 = raw.ltrunc1;
  rec.rtrunc1 = raw.rtrunc1;
  rec.ltrunc2 = raw.ltrunc2;
  rec.rtrunc2 = raw.rtrunc2;
  rec.weight = raw.weight;

  if (std::isnan(rec.time1) && raw.event.value_or(-1) != 2)
    throw BoundsError("time is missing");
  if (rec.weight < 0.0) throw BoundsError("negative weight");

  int code;
  if (raw.event.has_value()) {
    code = *raw.event;
    if (code < 0 || code > 3) throw CodeError("unknown event code " + std::to_string(code));
  } else {
    code = rec.time1 == rec.time2 ? 1 : 3;
  }
  // Coinciding interval bounds are exact failures, regardless of the
  // declared code.
  if (code == 3 && rec.time1 == rec.time2) code = 1;
  rec.event = static_cast<Event>(code);

  switch (rec.event) {
    case Event::right_censored:
      rec.time2 = kInf;
      break;
    case Event::left_censored:
      if (std::isnan(raw.time2)) {
        rec.time2 = rec.time1;
        rec.time1 = -kInf;
      } else {
        rec.time1 = -kInf;
      }
      break;
    default:
      break;
  }

  if (rec.time1 > rec.time2)
    throw BoundsError("time1 > time2 (" + std::to_string(rec.time1) + " > " +
                      std::to_string(rec.time2) + ")");

  if (rec.has_second_window()) {
    if (!(rec.rtrunc1 < rec.ltrunc2 && rec.ltrunc2 <= rec.rtrunc2))
      throw TruncationError("truncation windows must be disjoint and ordered");
  }

  if (rec.event == Event::observed || rec.event == Event::interval_censored) {
    bool ok = in_window(rec.time1, rec.time2, rec.ltrunc1, rec.rtrunc1);
    if (!ok && rec.has_second_window())
      ok = in_window(rec.time1, rec.time2, rec.ltrunc2, rec.rtrunc2);
    if (!ok)
      throw TruncationError("failure interval lies outside the truncation window");
  }
  if (rec.event == Event::right_censored && (rec.rtrunc1 < kInf || rec.has_second_window()))
    throw TruncationError("right-censored records cannot be right truncated");

  return rec;
}

namespace {

double parse_cell(const std::string& cell, double missing) {
  if (cell.empty()) return missing;
  if (cell == "inf" || cell == "+inf") return kInf;
  if (cell == "-inf") return -kInf;
  std::size_t pos = 0;
  double v;
  try {
    v = std::stod(cell, &pos);
  } catch (const std::exception&) {
    throw ParseError("cannot parse value '" + cell + "'");
  }
  if (pos != cell.size()) throw ParseError("trailing characters in value '" + cell + "'");
  return v;
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

namespace {

std::vector<std::pair<std::string, Dataset>> load_csv_impl(
    const std::string& path, const CsvSchema& schema, const std::string& group_column) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw EmptyDatasetError("empty file " + path);
  const auto header = split_row(line);

  auto column_of = [&](const std::string& canonical) -> int {
    auto it = schema.find(canonical);
    const std::string name = it == schema.end() ? canonical : it->second;
    for (std::size_t j = 0; j < header.size(); ++j)
      if (header[j] == name) return static_cast<int>(j);
    return -1;
  };
  const int c_time = column_of("time");
  const int c_time2 = column_of("time2");
  const int c_event = column_of("event");
  const int c_lt = column_of("ltrunc");
  const int c_rt = column_of("rtrunc");
  const int c_lt2 = column_of("ltrunc2");
  const int c_rt2 = column_of("rtrunc2");
  const int c_w = column_of("weight");
  if (c_time < 0) throw ParseError("no time column in " + path);
  int c_group = -1;
  if (!group_column.empty()) {
    for (std::size_t j = 0; j < header.size(); ++j)
      if (header[j] == group_column) c_group = static_cast<int>(j);
    if (c_group < 0) throw ParseError("no column '" + group_column + "' in " + path);
  }

  std::vector<std::pair<std::string, Dataset>> groups;
  auto group_of = [&](const std::string& label) -> Dataset& {
    for (auto& [name, ds] : groups)
      if (name == label) return ds;
    groups.emplace_back(label, Dataset{});
    groups.back().second.provenance = path;
    return groups.back().second;
  };
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_row(line);
    auto cell = [&](int j, double missing) {
      if (j < 0 || j >= static_cast<int>(cells.size())) return missing;
      return parse_cell(cells[j], missing);
    };
    try {
      RawRecord raw;
      raw.time1 = cell(c_time, std::numeric_limits<double>::quiet_NaN());
      raw.time2 = cell(c_time2, std::numeric_limits<double>::quiet_NaN());
      if (c_event >= 0 && c_event < static_cast<int>(cells.size()) && !cells[c_event].empty())
        raw.event = static_cast<int>(parse_cell(cells[c_event], 0));
      raw.ltrunc1 = cell(c_lt, -kInf);
      raw.rtrunc1 = cell(c_rt, kInf);
      raw.ltrunc2 = cell(c_lt2, kInf);
      raw.rtrunc2 = cell(c_rt2, kInf);
      raw.weight = cell(c_w, 1.0);
      auto rec = validate_record(raw);
      std::string label;
      if (c_group >= 0 && c_group < static_cast<int>(cells.size()))
        label = cells[static_cast<std::size_t>(c_group)];
      if (rec.weight > 0.0) group_of(label).records.push_back(rec);
    } catch (const Error& e) {
      throw ParseError("row " + std::to_string(row) + " of " + path + ": " + e.what());
    }
  }
  if (groups.empty()) throw EmptyDatasetError("no valid records in " + path);
  return groups;
}

}  // namespace

Dataset load_csv(const std::string& path, const CsvSchema& schema) {
  auto groups = load_csv_impl(path, schema, "");
  Dataset d = std::move(groups.front().second);
  for (std::size_t g = 1; g < groups.size(); ++g)
    d.records.insert(d.records.end(), groups[g].second.records.begin(),
                     groups[g].second.records.end());
  return d;
}

std::vector<std::pair<std::string, Dataset>> load_csv_grouped(
    const std::string& path, const CsvSchema& schema, const std::string& group_column) {
  return load_csv_impl(path, schema, group_column);
}

Dataset to_exceedances(const Dataset& d, const ExceedanceConfig& cfg) {
  const double u = cfg.thresh;
  Dataset out;
  out.unit = d.unit;
  out.provenance = d.provenance;
  for (const auto& r : d.records) {
    if (r.time2 <= u) continue;
    if (r.event == Event::observed && r.time1 <= u) continue;
    if ((r.event == Event::left_censored || r.event == Event::interval_censored) &&
        r.time1 < u && u < r.time2 && r.time1 > -kInf)
      throw AmbiguousExceedanceError(
          "censoring interval straddles the threshold; exceedance status is ambiguous");
    LifetimeRecord s = r;
    s.time1 = std::max(r.time1 - u, 0.0);
    s.time2 = r.time2 - u;
    s.ltrunc1 = std::max(r.ltrunc1 - u, 0.0);
    s.rtrunc1 = r.rtrunc1 - u;
    if (r.has_second_window()) {
      s.ltrunc2 = std::max(r.ltrunc2 - u, 0.0);
      s.rtrunc2 = r.rtrunc2 - u;
      if (s.rtrunc2 <= 0.0) {  // second window entirely below the threshold
        s.ltrunc2 = kInf;
        s.rtrunc2 = kInf;
      }
    }
    if (s.rtrunc1 <= 0.0) {  // first window below the threshold: promote the second
      if (s.has_second_window()) {
        s.ltrunc1 = s.ltrunc2;
        s.rtrunc1 = s.rtrunc2;
        s.ltrunc2 = kInf;
        s.rtrunc2 = kInf;
      } else {
        s.rtrunc1 = kInf;
      }
    }
    out.records.push_back(s);
  }
  return out;
}

}  // namespace lifetail
