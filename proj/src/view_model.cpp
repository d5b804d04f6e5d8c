#include "evtab/view_model.hpp"

#include <algorithm>
#include <unordered_set>

#include "evtab/csv.hpp"
#include "evtab/event_engine.hpp"
#include "evtab/ingestion.hpp"

namespace evtab {

ViewModel build_view_model(const Table& table, const ViewState& view,
                           const std::vector<std::string>* base_ids) {
  validate_view(view, table);
  ViewModel model;

  std::vector<std::string> ids = apply_filters(table, view.filters);
  if (base_ids) {
    std::unordered_set<std::string> kept(ids.begin(), ids.end());
    ids.clear();
    for (const auto& id : *base_ids)
      if (kept.contains(id)) ids.push_back(id);
  }
  ids = sort_rows(table, std::move(ids), view.sort, view);
  model.domain = axis_domain(table, ids, view);

  std::map<std::string, std::string> group_of;
  if (view.group_by) {
    std::vector<std::string> ordered;
    for (auto& g : group_rows(table, ids, *view.group_by, view.group_edges)) {
      ViewGroup vg{aggregate_group(table, g, view, model.domain), g.ids};
      for (const auto& id : g.ids) {
        group_of[id] = g.key;
        ordered.push_back(id);
      }
      model.groups.push_back(std::move(vg));
    }
    ids = std::move(ordered);
  }

  for (const auto& entry : layout_rows(ids, view)) {
    const ItemRow& row = table.at(entry.id);
    ViewRow out;
    out.id = entry.id;
    out.height = entry.height;
    if (auto g = group_of.find(entry.id); g != group_of.end()) out.group = g->second;
    for (const auto& d : table.descriptors()) out.cells[d.name] = row.cell(d.name);
    for (const auto& e : table.event_types()) {
      if (!view.visible_events.contains(e)) continue;
      if (auto v = resolve_event_value(table, row, e, view)) out.event_positions[e] = *v;
    }
    if (view.show_boxplot) {
      for (auto stat : kStatisticKeys) {
        if (entry.height == HeightClass::compressed && stat != view.overview_stat) continue;
        if (auto v = resolve_event_value(table, row, stat, view))
          out.boxplot_positions[std::string(stat)] = *v;
      }
    }
    out.warnings = row.warnings;
    for (const auto& w : row.warnings) model.warnings.push_back(row.id + ": " + w);
    model.rows.push_back(std::move(out));
  }
  return model;
}

nlohmann::json to_json(const CellValue& value) {
  return std::visit(
      [](const auto& x) -> nlohmann::json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Missing>) return nullptr;
        else if constexpr (std::is_same_v<T, Timestamp>) return format_timestamp(x.ms);
        else return x;
      },
      value);
}

nlohmann::json to_json(const BoxplotSummary& box) {
  return {{"min", box.min}, {"q1", box.q1}, {"median", box.median},
          {"q3", box.q3},   {"max", box.max}, {"durations", box.durations}};
}

nlohmann::json to_json(const EventBinGrid& grid) {
  return {{"event_type", grid.event_type},
          {"bin_edges", grid.bin_edges},
          {"counts", grid.counts},
          {"excluded", grid.excluded}};
}

nlohmann::json to_json(const ViewModel& model) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : model.rows) {
    nlohmann::json cells = nlohmann::json::object();
    for (const auto& [name, v] : r.cells) cells[name] = to_json(v);
    rows.push_back({
        {"id", r.id},
        {"height", r.height == HeightClass::full ? "full" : "compressed"},
        {"group", r.group ? nlohmann::json(*r.group) : nlohmann::json()},
        {"cells", std::move(cells)},
        {"events", r.event_positions},
        {"boxplot", r.boxplot_positions},
        {"warnings", r.warnings},
    });
  }
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : model.groups) {
    nlohmann::json heatmaps = nlohmann::json::array();
    for (const auto& h : g.aggregate.event_heatmaps) heatmaps.push_back(to_json(h));
    nlohmann::json boxplots = nlohmann::json::object();
    for (const auto& [name, box] : g.aggregate.numeric_boxplots) {
      auto b = to_json(box);
      b.erase("durations");
      boxplots[name] = std::move(b);
    }
    groups.push_back({{"key", g.aggregate.group_key},
                      {"row_count", g.aggregate.row_count},
                      {"ids", g.ids},
                      {"event_heatmaps", std::move(heatmaps)},
                      {"categorical_histograms", g.aggregate.categorical_histograms},
                      {"numeric_boxplots", std::move(boxplots)}});
  }
  return {{"rows", std::move(rows)},
          {"domain", {model.domain.lo, model.domain.hi}},
          {"groups", std::move(groups)},
          {"warnings", model.warnings},
          {"notice", model.notice ? nlohmann::json(*model.notice) : nlohmann::json()}};
}

std::string serialize(const ViewModel& model) { return to_json(model).dump(); }

std::string view_model_to_csv(const ViewModel& model, const Table& table) {
  csv::Record header{"id", "height", "group"};
  for (const auto& d : table.descriptors()) header.push_back(d.name);
  for (const auto& e : table.event_types()) header.push_back("pos:" + e);
  for (auto s : kStatisticKeys) header.push_back("box:" + std::string(s));
  std::vector<csv::Record> records{header};
  for (const auto& r : model.rows) {
    csv::Record rec{r.id, r.height == HeightClass::full ? "full" : "compressed", r.group.value_or("")};
    for (const auto& d : table.descriptors()) {
      const auto j = to_json(r.cells.at(d.name));
      rec.push_back(j.is_null() ? "" : j.is_string() ? j.get<std::string>() : j.dump());
    }
    for (const auto& e : table.event_types()) {
      auto it = r.event_positions.find(e);
      rec.push_back(it == r.event_positions.end() ? "" : format_number(it->second));
    }
    for (auto s : kStatisticKeys) {
      auto it = r.boxplot_positions.find(std::string(s));
      rec.push_back(it == r.boxplot_positions.end() ? "" : format_number(it->second));
    }
    records.push_back(std::move(rec));
  }
  return csv::write(records);
}

nlohmann::json table_to_json(const Table& table) {
  nlohmann::json descriptors = nlohmann::json::array();
  for (const auto& d : table.descriptors())
    descriptors.push_back({{"name", d.name},
                           {"kind", to_string(d.kind)},
                           {"unit", d.unit ? nlohmann::json(*d.unit) : nlohmann::json()}});
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : table.rows()) {
    nlohmann::json cells = nlohmann::json::object();
    for (const auto& [name, v] : r.cells) cells[name] = to_json(v);
    nlohmann::json events = nlohmann::json::object();
    for (const auto& [key, ts] : r.events) events[key] = ts;
    rows.push_back({{"id", r.id},
                    {"cells", std::move(cells)},
                    {"events", std::move(events)},
                    {"similar_ids", r.similar_ids},
                    {"similar_box", r.similar_box ? to_json(*r.similar_box) : nlohmann::json()},
                    {"warnings", r.warnings}});
  }
  return {{"descriptors", std::move(descriptors)},
          {"event_types", table.event_types()},
          {"rows", std::move(rows)}};
}

}  // namespace evtab
