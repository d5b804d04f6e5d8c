#pragma once

// View configuration: alignment, time unit, visibility, zoom, sort, group,
// filters, overview mode and selection. Serialized as JSON for persistence.

#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "evtab/core_model.hpp"

namespace evtab {

/// Token matched by category_in against missing cells.
inline constexpr std::string_view kMissingToken = "(missing)";

struct CategoryIn {
  std::set<std::string> tokens;
  friend bool operator==(const CategoryIn&, const CategoryIn&) = default;
};
/// Inclusive bounds in column units (epoch ms for dates).
struct Range {
  std::optional<double> lo;
  std::optional<double> hi;
  friend bool operator==(const Range&, const Range&) = default;
};
struct Equals {
  bool value = false;
  friend bool operator==(Equals, Equals) = default;
};
struct TextContains {
  std::string substring;
  friend bool operator==(const TextContains&, const TextContains&) = default;
};

struct FilterSpec {
  std::string column;
  std::variant<CategoryIn, Range, Equals, TextContains> predicate;
  friend bool operator==(const FilterSpec&, const FilterSpec&) = default;
};

enum class SortDirection { ascending, descending };

struct SortKey {
  /// Attribute column, event type, or statistic key.
  std::string target;
  SortDirection direction = SortDirection::ascending;
  friend bool operator==(const SortKey&, const SortKey&) = default;
};

struct SortSpec {
  std::vector<SortKey> keys;
  friend bool operator==(const SortSpec&, const SortSpec&) = default;
};

struct AxisDomain {
  double lo = -1;
  double hi = 1;
  friend bool operator==(AxisDomain, AxisDomain) = default;
};

inline constexpr int kDefaultBinCount = 24;

struct ViewState {
  /// Event type or CURRENT_TIME.
  std::string reference{kCurrentTime};
  TimestampMs time_unit_ms = kMsPerDay;
  /// Frozen "current time" of the session.
  TimestampMs now_ms = 0;
  std::set<std::string> visible_events;
  bool show_boxplot = true;
  /// Event the stored similar-item durations are measured from.
  std::string boxplot_anchor{kCurrentTime};
  bool overview = false;
  std::string overview_stat{kStatMedian};
  std::optional<AxisDomain> zoom_domain;
  SortSpec sort;
  std::optional<std::string> group_by;
  /// Ascending bin edges, required when grouping by a number or date column.
  std::vector<double> group_edges;
  std::vector<FilterSpec> filters;
  std::optional<std::string> selected;
  int bin_count = kDefaultBinCount;

  friend bool operator==(const ViewState&, const ViewState&) = default;
};

/// Default state for `table`: aligned to current time, one-day unit, every
/// event visible, boxplot shown.
ViewState default_view_state(const Table& table, TimestampMs now_ms);

/// Throws InputError describing the first field invalid against `table`.
void validate_view(const ViewState& view, const Table& table);

/// Throws InputError unless `filter` fits its column's kind.
void validate_filter(const FilterSpec& filter, const Table& table);

/// Throws InputError unless every target is an attribute column, a declared
/// event type, or a statistic key.
void validate_sort(const SortSpec& sort, const Table& table);

nlohmann::json to_json(const FilterSpec& f);
FilterSpec filter_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SortSpec& s);
SortSpec sort_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ViewState& v);
ViewState view_state_from_json(const nlohmann::json& j);

std::string_view to_string(SortDirection d);
SortDirection sort_direction_from_string(std::string_view text);

}  // namespace evtab
