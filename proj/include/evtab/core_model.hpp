#pragma once

// Typed table model shared by every evtab module: column descriptors,
// heterogeneous cells, per-item event maps and similar-item summaries.
// Tables are immutable once built; build_table is the only validating
// constructor.

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace evtab {

/// Millisecond timestamps and durations on the integer timeline.
using TimestampMs = std::int64_t;

inline constexpr TimestampMs kMsPerSecond = 1000;
inline constexpr TimestampMs kMsPerHour = 3600 * kMsPerSecond;
inline constexpr TimestampMs kMsPerDay = 24 * kMsPerHour;

/// Error raised for malformed input (bad payloads, schema violations).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Error raised when a named entity (session, item, saved state) is absent.
class NotFoundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Error raised for storage failures.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ColumnType { boolean, number, categorical, date };

std::string_view to_string(ColumnType kind);
ColumnType column_type_from_string(std::string_view text);

struct ColumnDescriptor {
  std::string name;
  ColumnType kind = ColumnType::categorical;
  std::optional<std::string> unit;

  friend bool operator==(const ColumnDescriptor&, const ColumnDescriptor&) = default;
};

struct Missing {
  friend bool operator==(Missing, Missing) = default;
};

/// Date cell payload; distinct from plain numbers so a cell's variant
/// always identifies its column kind.
struct Timestamp {
  TimestampMs ms = 0;
  friend bool operator==(Timestamp, Timestamp) = default;
};

using CellValue = std::variant<Missing, bool, double, std::string, Timestamp>;

inline bool is_missing(const CellValue& v) { return std::holds_alternative<Missing>(v); }

/// True when `v` is missing or holds the payload type of `kind`.
bool cell_matches_kind(const CellValue& v, ColumnType kind);

// Reserved names in the resolve/sort namespace.
inline constexpr std::string_view kCurrentTime = "CURRENT_TIME";
inline constexpr std::string_view kStatMin = "min";
inline constexpr std::string_view kStatQ1 = "q1";
inline constexpr std::string_view kStatMedian = "median";
inline constexpr std::string_view kStatQ3 = "q3";
inline constexpr std::string_view kStatMax = "max";
inline constexpr std::string_view kStatisticKeys[] = {kStatMin, kStatQ1, kStatMedian, kStatQ3,
                                                      kStatMax};

bool is_statistic_key(std::string_view key);
/// Statistic keys plus CURRENT_TIME.
bool is_reserved_key(std::string_view key);

using EventMap = std::map<std::string, TimestampMs, std::less<>>;

struct BoxplotSummary {
  double min = 0;
  double q1 = 0;
  double median = 0;
  double q3 = 0;
  double max = 0;
  std::vector<double> durations;

  /// Statistic by reserved key; throws InputError for any other key.
  double statistic(std::string_view key) const;

  friend bool operator==(const BoxplotSummary&, const BoxplotSummary&) = default;
};

struct ItemRow {
  std::string id;
  std::map<std::string, CellValue, std::less<>> cells;
  EventMap events;
  std::vector<std::string> similar_ids;
  std::optional<BoxplotSummary> similar_box;
  /// Load-time and data-quality notices attached to this row.
  std::vector<std::string> warnings;

  /// Cell for `column`, or Missing when the row has no entry.
  const CellValue& cell(std::string_view column) const;
  std::optional<TimestampMs> event(std::string_view key) const;

  friend bool operator==(const ItemRow&, const ItemRow&) = default;
};

class Table {
 public:
  Table() = default;

  const std::vector<ColumnDescriptor>& descriptors() const { return descriptors_; }
  const std::vector<std::string>& event_types() const { return event_types_; }
  const std::vector<ItemRow>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }

  const ItemRow* find(std::string_view id) const;
  const ItemRow& at(std::string_view id) const;
  const ColumnDescriptor* descriptor(std::string_view name) const;
  bool has_event_type(std::string_view key) const;

  friend bool operator==(const Table& a, const Table& b) {
    return a.descriptors_ == b.descriptors_ && a.event_types_ == b.event_types_ &&
           a.rows_ == b.rows_;
  }

 private:
  friend Table build_table(std::vector<ColumnDescriptor>, std::vector<std::string>,
                           std::vector<ItemRow>);

  std::vector<ColumnDescriptor> descriptors_;
  std::vector<std::string> event_types_;
  std::vector<ItemRow> rows_;
  std::unordered_map<std::string, std::size_t> row_index_;
};

/// Validates and assembles a table. Throws InputError naming the offending
/// row or column for: duplicate row ids or column names, cells that do not
/// match their declared kind (or name no declared column), undeclared event
/// keys, reserved keys used as event types, column names colliding with the
/// event/statistic namespace, and non-finite numbers.
Table build_table(std::vector<ColumnDescriptor> descriptors, std::vector<std::string> event_types,
                  std::vector<ItemRow> rows);

/// Total order within one column kind. Missing sorts after every present
/// value; callers apply sort direction to present values only.
std::weak_ordering compare_cells(const CellValue& a, const CellValue& b, ColumnType kind);

}  // namespace evtab
