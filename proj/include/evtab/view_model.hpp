#pragma once

// Resolved, render-ready view of a table under a ViewState. Built by the
// fixed pipeline filter -> sort -> group -> aggregate -> layout -> resolve.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "evtab/core_model.hpp"
#include "evtab/query_engine.hpp"
#include "evtab/view_state.hpp"

namespace evtab {

struct ViewRow {
  std::string id;
  HeightClass height = HeightClass::full;
  std::optional<std::string> group;
  std::map<std::string, CellValue> cells;
  /// Visible events only; absent events are omitted.
  std::map<std::string, double> event_positions;
  /// All five statistics on full rows; only the overview statistic on
  /// compressed rows. Empty when the boxplot is hidden or unresolvable.
  std::map<std::string, double> boxplot_positions;
  std::vector<std::string> warnings;
};

struct ViewGroup {
  GroupAggregate aggregate;
  std::vector<std::string> ids;
};

struct ViewModel {
  std::vector<ViewRow> rows;
  AxisDomain domain;
  std::vector<ViewGroup> groups;
  std::vector<std::string> warnings;
  std::optional<std::string> notice;
};

/// Runs the pipeline over every row of `table`, or over `base_ids` (in that
/// order) when given.
ViewModel build_view_model(const Table& table, const ViewState& view,
                           const std::vector<std::string>* base_ids = nullptr);

nlohmann::json to_json(const ViewModel& model);
nlohmann::json to_json(const CellValue& value);
nlohmann::json to_json(const BoxplotSummary& box);
nlohmann::json to_json(const EventBinGrid& grid);

/// Canonical serialization; identical inputs give identical bytes.
std::string serialize(const ViewModel& model);

/// Flat CSV: id, height, group, attribute cells, event positions, boxplot
/// positions.
std::string view_model_to_csv(const ViewModel& model, const Table& table);

/// Full table dump (descriptors, event types, rows) for inspection.
nlohmann::json table_to_json(const Table& table);

}  // namespace evtab
