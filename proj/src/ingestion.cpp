#include "evtab/ingestion.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "evtab/csv.hpp"
#include "evtab/similarity.hpp"

namespace evtab {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool is_bool_token(std::string_view t) {
  return t == "true" || t == "false" || t == "TRUE" || t == "FALSE" || t == "0" || t == "1";
}

bool parse_bool_token(std::string_view t) { return t == "true" || t == "TRUE" || t == "1"; }

int digits_value(std::string_view s, std::size_t pos, std::size_t count) {
  int v = 0;
  for (std::size_t i = pos; i < pos + count; ++i) v = v * 10 + (s[i] - '0');
  return v;
}

struct CivilTime {
  int year, month, day, hour = 0, minute = 0, second = 0;
};

std::optional<CivilTime> parse_civil(std::string_view s) {
  const bool date_only = s.size() == 10;
  if (!date_only && s.size() != 19) return std::nullopt;
  static constexpr std::string_view kDatePattern = "dddd-dd-dd";
  static constexpr std::string_view kTimePattern = " dd:dd:dd";
  for (std::size_t i = 0; i < kDatePattern.size(); ++i) {
    if (kDatePattern[i] == 'd' ? !is_digit(s[i]) : s[i] != kDatePattern[i]) return std::nullopt;
  }
  if (!date_only) {
    for (std::size_t i = 0; i < kTimePattern.size(); ++i) {
      const char c = s[10 + i];
      if (kTimePattern[i] == 'd' ? !is_digit(c) : c != kTimePattern[i]) return std::nullopt;
    }
  }
  CivilTime t{digits_value(s, 0, 4), digits_value(s, 5, 2), digits_value(s, 8, 2)};
  if (!date_only) {
    t.hour = digits_value(s, 11, 2);
    t.minute = digits_value(s, 14, 2);
    t.second = digits_value(s, 17, 2);
  }
  using namespace std::chrono;
  const year_month_day ymd{year{t.year}, month{static_cast<unsigned>(t.month)},
                           day{static_cast<unsigned>(t.day)}};
  if (!ymd.ok() || t.hour > 23 || t.minute > 59 || t.second > 59) return std::nullopt;
  return t;
}

}  // namespace

FieldMapping mapping_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("mapping must be a JSON object");
  FieldMapping m;
  try {
    if (!j.contains("id")) throw InputError("mapping: 'id' is mandatory");
    m.id = j.at("id").get<std::string>();
    if (j.contains("data_columns"))
      m.data_columns = j.at("data_columns").get<std::vector<std::string>>();
    if (j.contains("event_data"))
      m.event_data = j.at("event_data").get<std::map<std::string, std::string>>();
    if (j.contains("similar_data_duration") && !j.at("similar_data_duration").is_null())
      m.similar_data_duration = j.at("similar_data_duration").get<std::string>();
    if (j.contains("similar_data_ids") && !j.at("similar_data_ids").is_null())
      m.similar_data_ids = j.at("similar_data_ids").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("mapping: ") + e.what());
  }
  if (m.id.empty()) throw InputError("mapping: 'id' is mandatory");
  return m;
}

nlohmann::json mapping_to_json(const FieldMapping& m) {
  nlohmann::json j;
  j["data_columns"] = m.data_columns;
  j["event_data"] = m.event_data;
  j["similar_data_duration"] =
      m.similar_data_duration ? nlohmann::json(*m.similar_data_duration) : nlohmann::json();
  j["similar_data_ids"] =
      m.similar_data_ids ? nlohmann::json(*m.similar_data_ids) : nlohmann::json();
  j["id"] = m.id;
  return j;
}

DurationUnit duration_unit_from_string(std::string_view text) {
  if (text == "days") return DurationUnit::days;
  if (text == "hours") return DurationUnit::hours;
  if (text == "ms") return DurationUnit::ms;
  throw InputError("unknown duration unit '" + std::string(text) + "'");
}

std::string_view to_string(DurationUnit unit) {
  switch (unit) {
    case DurationUnit::days:
      return "days";
    case DurationUnit::hours:
      return "hours";
    case DurationUnit::ms:
      return "ms";
  }
  return "days";
}

TimestampMs duration_unit_ms(DurationUnit unit) {
  switch (unit) {
    case DurationUnit::days:
      return kMsPerDay;
    case DurationUnit::hours:
      return kMsPerHour;
    case DurationUnit::ms:
      return 1;
  }
  return kMsPerDay;
}

std::optional<double> parse_decimal(std::string_view text) {
  std::size_t i = 0;
  if (i < text.size() && (text[i] == '+' || text[i] == '-')) ++i;
  std::size_t digits = 0;
  while (i < text.size() && is_digit(text[i])) ++i, ++digits;
  if (i < text.size() && text[i] == '.') {
    ++i;
    while (i < text.size() && is_digit(text[i])) ++i, ++digits;
  }
  if (digits == 0) return std::nullopt;
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    ++i;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) ++i;
    std::size_t exp_digits = 0;
    while (i < text.size() && is_digit(text[i])) ++i, ++exp_digits;
    if (exp_digits == 0) return std::nullopt;
  }
  if (i != text.size()) return std::nullopt;
  // from_chars rejects a leading '+'.
  std::string_view body = text.front() == '+' ? text.substr(1) : text;
  double value = 0;
  auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), value);
  if (ec != std::errc{} || ptr != body.data() + body.size() || !std::isfinite(value))
    return std::nullopt;
  return value;
}

std::string format_number(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

ColumnType infer_column_type(const std::vector<std::string>& values) {
  std::vector<std::string_view> tokens;
  for (const auto& v : values) {
    std::string_view t = trim(v);
    if (!t.empty()) tokens.push_back(t);
  }
  if (tokens.empty()) return ColumnType::categorical;

  const bool all_bool = std::all_of(tokens.begin(), tokens.end(), is_bool_token);
  const bool any_alpha = std::any_of(tokens.begin(), tokens.end(),
                                     [](std::string_view t) { return t != "0" && t != "1"; });
  if (all_bool && any_alpha) return ColumnType::boolean;
  if (std::all_of(tokens.begin(), tokens.end(),
                  [](std::string_view t) { return parse_decimal(t).has_value(); }))
    return ColumnType::number;
  if (std::all_of(tokens.begin(), tokens.end(), matches_timestamp_grammar))
    return ColumnType::date;
  return ColumnType::categorical;
}

bool matches_timestamp_grammar(std::string_view text) { return parse_civil(text).has_value(); }

TimestampMs parse_timestamp(std::string_view text) {
  const auto t = parse_civil(trim(text));
  if (!t) throw InputError("invalid timestamp '" + std::string(text) + "'");
  using namespace std::chrono;
  const sys_days days{year{t->year} / month{static_cast<unsigned>(t->month)} /
                      day{static_cast<unsigned>(t->day)}};
  const auto tp = days + hours{t->hour} + minutes{t->minute} + seconds{t->second};
  return duration_cast<milliseconds>(tp.time_since_epoch()).count();
}

std::string format_timestamp(TimestampMs ms) {
  using namespace std::chrono;
  const sys_time<milliseconds> tp{milliseconds{ms}};
  const sys_days day_point = floor<days>(tp);
  const year_month_day ymd{day_point};
  const auto secs = duration_cast<seconds>(floor<seconds>(tp) - day_point).count();
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u %02lld:%02lld:%02lld", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long long>(secs / 3600), static_cast<long long>(secs / 60 % 60),
                static_cast<long long>(secs % 60));
  return buf;
}

std::vector<double> parse_delimited_numbers(std::string_view text, char separator) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = text.find(separator, start);
    const std::string_view token =
        trim(text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
    const auto value = parse_decimal(token);
    if (!value) throw InputError("invalid number token '" + std::string(token) + "'");
    out.push_back(*value);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

namespace {

std::vector<std::string> split_ids(std::string_view text) {
  std::vector<std::string> out;
  if (trim(text).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = text.find(kListSeparator, start);
    const std::string_view token =
        trim(text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
    if (!token.empty()) out.emplace_back(token);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

CellValue parse_cell(std::string_view token, ColumnType kind) {
  if (token.empty()) return Missing{};
  switch (kind) {
    case ColumnType::boolean:
      if (!is_bool_token(token)) throw InputError("invalid boolean '" + std::string(token) + "'");
      return parse_bool_token(token);
    case ColumnType::number: {
      auto v = parse_decimal(token);
      if (!v) throw InputError("invalid number '" + std::string(token) + "'");
      return *v;
    }
    case ColumnType::date:
      return Timestamp{parse_timestamp(token)};
    case ColumnType::categorical:
      return std::string(token);
  }
  return Missing{};
}

std::string record_context(std::size_t record, std::string_view column) {
  return "row " + std::to_string(record) + ", column '" + std::string(column) + "': ";
}

}  // namespace

Table load_dataset(std::string_view csv_text, const FieldMapping& mapping,
                   DurationUnit duration_unit) {
  std::vector<csv::Record> records = csv::parse(csv_text);
  std::erase_if(records, [](const csv::Record& r) { return r.size() == 1 && trim(r[0]).empty(); });
  if (records.empty()) throw InputError("dataset has no header row");
  const csv::Record& header = records.front();

  auto column_index = [&](const std::string& name) {
    std::size_t found = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (trim(header[i]) != name) continue;
      if (found != header.size()) throw InputError("column '" + name + "' appears more than once");
      found = i;
    }
    if (found == header.size()) throw InputError("column '" + name + "' not found");
    return found;
  };

  const std::size_t id_col = column_index(mapping.id);
  std::vector<std::size_t> data_cols;
  for (const auto& name : mapping.data_columns) data_cols.push_back(column_index(name));
  std::vector<std::pair<std::string, std::size_t>> event_cols;
  for (const auto& [key, source] : mapping.event_data) event_cols.emplace_back(key, column_index(source));
  std::optional<std::size_t> duration_col, ids_col;
  if (mapping.similar_data_duration) duration_col = column_index(*mapping.similar_data_duration);
  if (mapping.similar_data_ids) ids_col = column_index(*mapping.similar_data_ids);

  const std::size_t n_rows = records.size() - 1;
  auto field = [&](std::size_t r, std::size_t c) -> std::string_view {
    const csv::Record& rec = records[r + 1];
    return c < rec.size() ? trim(rec[c]) : std::string_view{};
  };

  std::vector<ColumnDescriptor> descriptors;
  for (std::size_t k = 0; k < data_cols.size(); ++k) {
    std::vector<std::string> values;
    values.reserve(n_rows);
    for (std::size_t r = 0; r < n_rows; ++r) values.emplace_back(field(r, data_cols[k]));
    descriptors.push_back({mapping.data_columns[k], infer_column_type(values), std::nullopt});
  }

  const double unit_ms = static_cast<double>(duration_unit_ms(duration_unit));
  std::vector<ItemRow> rows;
  rows.reserve(n_rows);
  for (std::size_t r = 0; r < n_rows; ++r) {
    const std::size_t record_no = r + 1;
    ItemRow row;
    row.id = std::string(field(r, id_col));
    if (row.id.empty()) throw InputError(record_context(record_no, mapping.id) + "empty id");
    for (std::size_t k = 0; k < data_cols.size(); ++k) {
      try {
        CellValue v = parse_cell(field(r, data_cols[k]), descriptors[k].kind);
        if (!is_missing(v)) row.cells.emplace(descriptors[k].name, std::move(v));
      } catch (const InputError& e) {
        throw InputError(record_context(record_no, descriptors[k].name) + e.what());
      }
    }
    for (const auto& [key, col] : event_cols) {
      const std::string_view token = field(r, col);
      if (token.empty()) continue;
      try {
        row.events.emplace(key, parse_timestamp(token));
      } catch (const InputError& e) {
        throw InputError(record_context(record_no, header[col]) + e.what());
      }
    }
    if (duration_col) {
      std::vector<double> durations;
      try {
        durations = parse_delimited_numbers(field(r, *duration_col));
      } catch (const InputError& e) {
        throw InputError(record_context(record_no, header[*duration_col]) + e.what());
      }
      for (double& d : durations) d *= unit_ms;
      if (!durations.empty()) {
        row.similar_box = five_number_summary(durations);
        if (row.similar_box->min < 0) row.warnings.emplace_back(kNegativeDurationWarning);
      }
    }
    if (ids_col) row.similar_ids = split_ids(field(r, *ids_col));
    if (duration_col && ids_col && row.similar_box && !row.similar_ids.empty() &&
        row.similar_ids.size() != row.similar_box->durations.size()) {
      row.warnings.push_back("similar ids/durations length mismatch (" +
                             std::to_string(row.similar_ids.size()) + " ids, " +
                             std::to_string(row.similar_box->durations.size()) + " durations)");
    }
    rows.push_back(std::move(row));
  }

  std::vector<std::string> event_types;
  for (const auto& [key, source] : mapping.event_data) event_types.push_back(key);
  return build_table(std::move(descriptors), std::move(event_types), std::move(rows));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Table load_dataset_file(const std::filesystem::path& path, const FieldMapping& mapping,
                        DurationUnit duration_unit) {
  return load_dataset(read_text_file(path), mapping, duration_unit);
}

namespace {

std::string format_cell(const CellValue& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Missing>) return "";
        else if constexpr (std::is_same_v<T, bool>) return x ? "true" : "false";
        else if constexpr (std::is_same_v<T, double>) return format_number(x);
        else if constexpr (std::is_same_v<T, std::string>) return x;
        else return format_timestamp(x.ms);
      },
      v);
}

std::string unique_header(std::string base, const std::set<std::string>& taken) {
  std::string name = base;
  for (int i = 2; taken.contains(name); ++i) name = base + "_" + std::to_string(i);
  return name;
}

}  // namespace

ExportedDataset export_dataset(const Table& table) {
  ExportedDataset out;
  std::set<std::string> taken;
  csv::Record header;
  out.mapping.id = unique_header("id", taken);
  taken.insert(out.mapping.id);
  header.push_back(out.mapping.id);
  for (const auto& d : table.descriptors()) {
    if (taken.contains(d.name)) throw InputError("export: column name clash on '" + d.name + "'");
    taken.insert(d.name);
    out.mapping.data_columns.push_back(d.name);
    header.push_back(d.name);
  }
  for (const auto& key : table.event_types()) {
    const std::string col = unique_header(key + "_date", taken);
    taken.insert(col);
    out.mapping.event_data[key] = col;
  }
  for (const auto& [key, col] : out.mapping.event_data) header.push_back(col);
  out.mapping.similar_data_duration = unique_header("similar_data_duration", taken);
  taken.insert(*out.mapping.similar_data_duration);
  out.mapping.similar_data_ids = unique_header("similar_data_ids", taken);
  header.push_back(*out.mapping.similar_data_duration);
  header.push_back(*out.mapping.similar_data_ids);

  std::vector<csv::Record> records{header};
  for (const auto& row : table.rows()) {
    csv::Record rec{row.id};
    for (const auto& d : table.descriptors()) rec.push_back(format_cell(row.cell(d.name)));
    for (const auto& [key, col] : out.mapping.event_data) {
      const auto ts = row.event(key);
      if (ts && *ts % kMsPerSecond != 0)
        throw InputError("export: event '" + key + "' of row " + row.id +
                         " has sub-second precision");
      rec.push_back(ts ? format_timestamp(*ts) : "");
    }
    std::string durations;
    if (row.similar_box) {
      for (std::size_t i = 0; i < row.similar_box->durations.size(); ++i) {
        if (i > 0) durations.push_back(kListSeparator);
        durations += format_number(row.similar_box->durations[i]);
      }
    }
    rec.push_back(std::move(durations));
    std::string ids;
    for (std::size_t i = 0; i < row.similar_ids.size(); ++i) {
      if (i > 0) ids.push_back(kListSeparator);
      ids += row.similar_ids[i];
    }
    rec.push_back(std::move(ids));
    records.push_back(std::move(rec));
  }
  out.csv = csv::write(records);
  return out;
}

}  // namespace evtab
