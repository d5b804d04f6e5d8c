#pragma once

// Loading of delimited datasets through the five-field mapping (data
// columns, event data, similar durations, similar ids, row id), column type
// inference, timestamp parsing, and the synthetic steel-logistics generator.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "evtab/core_model.hpp"

namespace evtab {

struct FieldMapping {
  std::vector<std::string> data_columns;
  /// Event type key -> source column holding that event's date.
  std::map<std::string, std::string> event_data;
  std::optional<std::string> similar_data_duration;
  std::optional<std::string> similar_data_ids;
  std::string id;

  friend bool operator==(const FieldMapping&, const FieldMapping&) = default;
};

FieldMapping mapping_from_json(const nlohmann::json& j);
nlohmann::json mapping_to_json(const FieldMapping& m);

enum class DurationUnit { days, hours, ms };

DurationUnit duration_unit_from_string(std::string_view text);
std::string_view to_string(DurationUnit unit);
TimestampMs duration_unit_ms(DurationUnit unit);

/// Separator shared by the similar-durations and similar-ids fields.
inline constexpr char kListSeparator = ';';

ColumnType infer_column_type(const std::vector<std::string>& values);

/// True when `text` matches `YYYY-MM-DD` or `YYYY-MM-DD HH:MM:SS` with a
/// valid calendar date and time of day.
bool matches_timestamp_grammar(std::string_view text);

/// Epoch milliseconds of a naive UTC timestamp. Throws InputError with the
/// offending text on grammar mismatch.
TimestampMs parse_timestamp(std::string_view text);

/// `YYYY-MM-DD HH:MM:SS` (UTC). Sub-second parts are truncated toward the
/// earlier second.
std::string format_timestamp(TimestampMs ms);

std::vector<double> parse_delimited_numbers(std::string_view text, char separator = kListSeparator);

/// Finite decimal literal: optional sign, digits with optional fraction,
/// optional exponent. Returns nullopt for anything else.
std::optional<double> parse_decimal(std::string_view text);

/// Shortest text that reparses to the same double.
std::string format_number(double value);

/// Loads CSV text through `mapping`. Parse errors carry the 1-based data
/// record number and the column name.
Table load_dataset(std::string_view csv_text, const FieldMapping& mapping,
                   DurationUnit duration_unit = DurationUnit::days);

Table load_dataset_file(const std::filesystem::path& path, const FieldMapping& mapping,
                        DurationUnit duration_unit = DurationUnit::days);

struct ExportedDataset {
  std::string csv;
  FieldMapping mapping;
  /// Unit the similar-durations column was written in.
  DurationUnit duration_unit = DurationUnit::ms;
};

/// Writes `table` back to CSV in a form load_dataset reproduces exactly
/// (modulo column order and display units) with the returned mapping.
ExportedDataset export_dataset(const Table& table);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

// Synthetic steel-logistics data.

struct GeneratorConfig {
  int row_count = 0;
  std::uint64_t seed = 0;
  TimestampMs now = 0;
};

inline constexpr std::string_view kSteelCategories[] = {"S235", "S355", "DC01", "DD11", "HX340"};
inline constexpr std::string_view kSteelWarehouses[] = {"WH-A", "WH-B", "WH-C"};

/// Current coils awaiting pickling: hot_rolled within 30 days before now,
/// shipping within 60 days after now, galvanizing_planned for about 40% of
/// rows. The shipping_due date column mirrors the shipping event so it can
/// be filtered. Throws InputError for a non-positive row count.
Table generate_steel_dataset(const GeneratorConfig& config);

/// Historical coils with a realized `pickled` event at or before now; the
/// storage duration is pickled - hot_rolled.
Table generate_steel_history(const GeneratorConfig& config);

/// Mapping matching the generated steel CSV exports.
FieldMapping steel_mapping(bool with_similar_fields);

}  // namespace evtab
