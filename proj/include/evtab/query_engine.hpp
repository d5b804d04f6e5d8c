#pragma once

// Filtering, multi-key sorting over attribute, event and statistic keys,
// grouping with per-group aggregates, and overview-mode row layout.

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evtab/core_model.hpp"
#include "evtab/event_engine.hpp"
#include "evtab/view_state.hpp"

namespace evtab {

/// Conjunction of `filters` in table order. A missing cell fails every
/// predicate except a category_in listing kMissingToken.
std::vector<std::string> apply_filters(const Table& table, const std::vector<FilterSpec>& filters);

/// Stable multi-key sort. Attribute keys compare with compare_cells, event
/// and statistic keys by resolved axis value. Missing or unresolved values go
/// last for either direction.
std::vector<std::string> sort_rows(const Table& table, std::vector<std::string> ids,
                                   const SortSpec& sort, const ViewState& view);

struct Group {
  std::string key;
  std::vector<std::string> ids;
  friend bool operator==(const Group&, const Group&) = default;
};

inline constexpr std::string_view kOutOfRangeGroup = "(out of range)";

/// Partition by cell value. Categorical and boolean columns group by value;
/// number and date columns need `edges` and group by half-open bins, the last
/// one closed. Groups follow compare_cells order of their keys; values
/// outside the edges form "(out of range)", missing cells "(missing)", both
/// after every regular group. Empty groups are omitted.
std::vector<Group> group_rows(const Table& table, std::span<const std::string> ids,
                              std::string_view column, std::span<const double> edges = {});

struct GroupAggregate {
  std::string group_key;
  int row_count = 0;
  std::vector<EventBinGrid> event_heatmaps;
  std::map<std::string, std::map<std::string, int>> categorical_histograms;
  std::map<std::string, BoxplotSummary> numeric_boxplots;
};

/// Heatmaps for each visible event over `domain` with view.bin_count bins,
/// token histograms for categorical and boolean columns, and five-number
/// summaries for number columns with at least one value.
GroupAggregate aggregate_group(const Table& table, const Group& group, const ViewState& view,
                               AxisDomain domain);

enum class HeightClass { full, compressed };

struct RowLayoutEntry {
  std::string id;
  HeightClass height = HeightClass::full;
  friend bool operator==(const RowLayoutEntry&, const RowLayoutEntry&) = default;
};

using RowLayout = std::vector<RowLayoutEntry>;

RowLayout layout_rows(std::span<const std::string> ids, const ViewState& view);

struct SimilarView {
  /// History ids in similar_ids order, restricted to those present.
  std::vector<std::string> ids;
  std::vector<std::string> warnings;
  ViewState view;
};

/// Rows of `history` referenced by the selected candidate. Throws
/// NotFoundError for an unknown selection.
SimilarView similar_view(const Table& candidates, const Table& history,
                         std::string_view selected_id, TimestampMs now_ms);

}  // namespace evtab
