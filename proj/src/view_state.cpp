#include "evtab/view_state.hpp"

#include <cmath>

#include "evtab/ingestion.hpp"

namespace evtab {

ViewState default_view_state(const Table& table, TimestampMs now_ms) {
  ViewState v;
  v.now_ms = now_ms;
  v.visible_events.insert(table.event_types().begin(), table.event_types().end());
  return v;
}

std::string_view to_string(SortDirection d) {
  return d == SortDirection::ascending ? "ascending" : "descending";
}

SortDirection sort_direction_from_string(std::string_view text) {
  if (text == "ascending" || text == "asc") return SortDirection::ascending;
  if (text == "descending" || text == "desc") return SortDirection::descending;
  throw InputError("unknown sort direction '" + std::string(text) + "'");
}

namespace {

void check_time_reference(const std::string& key, const Table& table, std::string_view what) {
  if (key != kCurrentTime && !table.has_event_type(key))
    throw InputError(std::string(what) + ": unknown event '" + key + "'");
}

}  // namespace

void validate_filter(const FilterSpec& f, const Table& table) {
  const ColumnDescriptor* d = table.descriptor(f.column);
  if (!d) throw InputError("filter: unknown column '" + f.column + "'");
  const auto kind = d->kind;
  auto mismatch = [&](std::string_view predicate) {
    return InputError("filter: predicate " + std::string(predicate) + " does not apply to " +
                      std::string(to_string(kind)) + " column '" + f.column + "'");
  };
  if (std::holds_alternative<CategoryIn>(f.predicate)) {
    if (kind != ColumnType::categorical) throw mismatch("category_in");
  } else if (const auto* r = std::get_if<Range>(&f.predicate)) {
    if (kind != ColumnType::number && kind != ColumnType::date) throw mismatch("range");
    if ((r->lo && !std::isfinite(*r->lo)) || (r->hi && !std::isfinite(*r->hi)))
      throw InputError("filter: range bounds must be finite");
    if (r->lo && r->hi && *r->lo > *r->hi) throw InputError("filter: range lo > hi on '" + f.column + "'");
  } else if (std::holds_alternative<Equals>(f.predicate)) {
    if (kind != ColumnType::boolean) throw mismatch("equals");
  } else if (kind != ColumnType::categorical) {
    throw mismatch("text_contains");
  }
}

void validate_sort(const SortSpec& sort, const Table& table) {
  for (const auto& key : sort.keys) {
    if (table.descriptor(key.target) || table.has_event_type(key.target) ||
        is_statistic_key(key.target))
      continue;
    throw InputError("unknown sort target '" + key.target + "'");
  }
}

void validate_view(const ViewState& v, const Table& table) {
  if (v.time_unit_ms <= 0) throw InputError("time_unit_ms must be positive");
  check_time_reference(v.reference, table, "reference");
  check_time_reference(v.boxplot_anchor, table, "boxplot_anchor");
  for (const auto& e : v.visible_events)
    if (!table.has_event_type(e)) throw InputError("visible_events: unknown event '" + e + "'");
  if (!is_statistic_key(v.overview_stat))
    throw InputError("overview_stat must be one of min, q1, median, q3, max");
  if (v.zoom_domain) {
    const auto& z = *v.zoom_domain;
    if (!std::isfinite(z.lo) || !std::isfinite(z.hi) || !(z.lo < z.hi))
      throw InputError("zoom domain requires finite lo < hi");
  }
  if (v.bin_count < 1) throw InputError("bin_count must be at least 1");
  validate_sort(v.sort, table);
  for (const auto& f : v.filters) validate_filter(f, table);
  if (v.group_by) {
    const ColumnDescriptor* d = table.descriptor(*v.group_by);
    if (!d) throw InputError("group_by: unknown column '" + *v.group_by + "'");
    if (d->kind == ColumnType::number || d->kind == ColumnType::date) {
      if (v.group_edges.size() < 2)
        throw InputError("group_by: column '" + *v.group_by + "' needs at least two bin edges");
    }
  }
  for (std::size_t i = 0; i < v.group_edges.size(); ++i) {
    if (!std::isfinite(v.group_edges[i])) throw InputError("group_edges must be finite");
    if (i > 0 && !(v.group_edges[i - 1] < v.group_edges[i]))
      throw InputError("group_edges must be strictly ascending");
  }
  if (v.selected && !table.find(*v.selected))
    throw InputError("selected: unknown item '" + *v.selected + "'");
}

nlohmann::json to_json(const FilterSpec& f) {
  nlohmann::json j{{"column", f.column}};
  if (const auto* c = std::get_if<CategoryIn>(&f.predicate)) {
    j["predicate"] = "category_in";
    j["tokens"] = c->tokens;
  } else if (const auto* r = std::get_if<Range>(&f.predicate)) {
    j["predicate"] = "range";
    j["lo"] = r->lo ? nlohmann::json(*r->lo) : nlohmann::json();
    j["hi"] = r->hi ? nlohmann::json(*r->hi) : nlohmann::json();
  } else if (const auto* e = std::get_if<Equals>(&f.predicate)) {
    j["predicate"] = "equals";
    j["value"] = e->value;
  } else {
    j["predicate"] = "text_contains";
    j["substring"] = std::get<TextContains>(f.predicate).substring;
  }
  return j;
}

namespace {

std::optional<double> bound_from_json(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  const auto& b = j.at(key);
  if (b.is_string()) return static_cast<double>(parse_timestamp(b.get<std::string>()));
  return b.get<double>();
}

template <typename F>
auto json_guard(std::string_view what, F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

FilterSpec filter_from_json(const nlohmann::json& j) {
  return json_guard("filter", [&] {
    FilterSpec f;
    f.column = j.at("column").get<std::string>();
    const std::string p = j.at("predicate").get<std::string>();
    if (p == "category_in") {
      f.predicate = CategoryIn{j.at("tokens").get<std::set<std::string>>()};
    } else if (p == "range") {
      f.predicate = Range{bound_from_json(j, "lo"), bound_from_json(j, "hi")};
    } else if (p == "equals") {
      f.predicate = Equals{j.at("value").get<bool>()};
    } else if (p == "text_contains") {
      f.predicate = TextContains{j.at("substring").get<std::string>()};
    } else {
      throw InputError("unknown filter predicate '" + p + "'");
    }
    return f;
  });
}

nlohmann::json to_json(const SortSpec& s) {
  nlohmann::json keys = nlohmann::json::array();
  for (const auto& k : s.keys) keys.push_back({{"target", k.target}, {"direction", to_string(k.direction)}});
  return keys;
}

SortSpec sort_from_json(const nlohmann::json& j) {
  return json_guard("sort", [&] {
    if (!j.is_array()) throw InputError("sort must be an array of keys");
    SortSpec s;
    for (const auto& k : j)
      s.keys.push_back({k.at("target").get<std::string>(),
                        sort_direction_from_string(k.value("direction", std::string("ascending")))});
    return s;
  });
}

nlohmann::json to_json(const ViewState& v) {
  nlohmann::json filters = nlohmann::json::array();
  for (const auto& f : v.filters) filters.push_back(to_json(f));
  return {
      {"reference", v.reference},
      {"time_unit_ms", v.time_unit_ms},
      {"now_ms", v.now_ms},
      {"visible_events", v.visible_events},
      {"show_boxplot", v.show_boxplot},
      {"boxplot_anchor", v.boxplot_anchor},
      {"overview", v.overview},
      {"overview_stat", v.overview_stat},
      {"zoom_domain", v.zoom_domain ? nlohmann::json::array({v.zoom_domain->lo, v.zoom_domain->hi})
                                    : nlohmann::json()},
      {"sort", to_json(v.sort)},
      {"group_by", v.group_by ? nlohmann::json(*v.group_by) : nlohmann::json()},
      {"group_edges", v.group_edges},
      {"filters", std::move(filters)},
      {"selected", v.selected ? nlohmann::json(*v.selected) : nlohmann::json()},
      {"bin_count", v.bin_count},
  };
}

ViewState view_state_from_json(const nlohmann::json& j) {
  return json_guard("view state", [&] {
    if (!j.is_object()) throw InputError("view state must be a JSON object");
    ViewState v;
    v.reference = j.value("reference", v.reference);
    v.time_unit_ms = j.value("time_unit_ms", v.time_unit_ms);
    v.now_ms = j.value("now_ms", v.now_ms);
    if (j.contains("visible_events"))
      v.visible_events = j.at("visible_events").get<std::set<std::string>>();
    v.show_boxplot = j.value("show_boxplot", v.show_boxplot);
    v.boxplot_anchor = j.value("boxplot_anchor", v.boxplot_anchor);
    v.overview = j.value("overview", v.overview);
    v.overview_stat = j.value("overview_stat", v.overview_stat);
    if (j.contains("zoom_domain") && !j.at("zoom_domain").is_null()) {
      const auto& z = j.at("zoom_domain");
      if (!z.is_array() || z.size() != 2) throw InputError("zoom_domain must be [lo, hi]");
      v.zoom_domain = AxisDomain{z.at(0).get<double>(), z.at(1).get<double>()};
    }
    if (j.contains("sort")) v.sort = sort_from_json(j.at("sort"));
    if (j.contains("group_by") && !j.at("group_by").is_null())
      v.group_by = j.at("group_by").get<std::string>();
    if (j.contains("group_edges")) v.group_edges = j.at("group_edges").get<std::vector<double>>();
    if (j.contains("filters"))
      for (const auto& f : j.at("filters")) v.filters.push_back(filter_from_json(f));
    if (j.contains("selected") && !j.at("selected").is_null())
      v.selected = j.at("selected").get<std::string>();
    v.bin_count = j.value("bin_count", v.bin_count);
    return v;
  });
}

}  // namespace evtab
