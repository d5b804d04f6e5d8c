#pragma once

// Shared-axis resolution of temporal values. Event timestamps and boxplot
// statistics go through the same function: subtract the reference instant,
// divide by the time unit.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evtab/core_model.hpp"
#include "evtab/view_state.hpp"

namespace evtab {

/// Axis coordinate of `key` for `row`. For an event key: (ts(key) - ref) /
/// unit. For a statistic key: (anchor + stat - ref) / unit, with the anchor
/// taken from view.boxplot_anchor. The reference instant is now_ms for
/// CURRENT_TIME, otherwise the row's own reference event. Returns nullopt
/// when any input is absent. Throws InputError for a key that is neither a
/// declared event type nor a statistic key.
std::optional<double> resolve_event_value(const Table& table, const ItemRow& row,
                                          std::string_view key, const ViewState& view);

/// Zoom domain when set; otherwise the padded extent of all resolved visible
/// events (and statistics when the boxplot is shown). Falls back to [-1, 1]
/// when nothing resolves.
AxisDomain axis_domain(const Table& table, std::span<const std::string> ids,
                       const ViewState& view);

struct EventBinGrid {
  std::string event_type;
  std::vector<double> bin_edges;
  std::vector<int> counts;
  /// Present values that fell outside the domain.
  int excluded = 0;

  friend bool operator==(const EventBinGrid&, const EventBinGrid&) = default;
};

/// Uniform half-open bins over `domain`, last bin closed. Throws InputError
/// for bin_count < 1 or a domain without lo < hi.
EventBinGrid bin_event_counts(const Table& table, std::span<const std::string> ids,
                              std::string_view event_type, AxisDomain domain, int bin_count,
                              const ViewState& view);

/// Bin index of `value` in `edges` (half-open, last closed), or nullopt when
/// outside [edges.front(), edges.back()].
std::optional<std::size_t> bin_index(std::span<const double> edges, double value);

/// Uniform edges with exact endpoints.
std::vector<double> uniform_edges(AxisDomain domain, int bin_count);

ViewState zoom(ViewState view, AxisDomain domain);
/// Shifts the zoom domain; unchanged when no zoom is set.
ViewState pan(ViewState view, double delta_units);
ViewState reset_zoom(ViewState view);

}  // namespace evtab
