#include "evtab/event_engine.hpp"

#include <algorithm>
#include <cmath>

namespace evtab {

namespace {

std::optional<TimestampMs> instant(const ItemRow& row, const std::string& key, TimestampMs now) {
  if (key == kCurrentTime) return now;
  return row.event(key);
}

}  // namespace

std::optional<double> resolve_event_value(const Table& table, const ItemRow& row,
                                          std::string_view key, const ViewState& view) {
  const bool statistic = is_statistic_key(key);
  if (!statistic && !table.has_event_type(key))
    throw InputError("unknown event or statistic key '" + std::string(key) + "'");
  const auto ref = instant(row, view.reference, view.now_ms);
  if (!ref) return std::nullopt;
  const auto unit = static_cast<double>(view.time_unit_ms);
  if (!statistic) {
    const auto ts = row.event(key);
    if (!ts) return std::nullopt;
    return static_cast<double>(*ts - *ref) / unit;
  }
  if (!row.similar_box) return std::nullopt;
  const auto anchor = instant(row, view.boxplot_anchor, view.now_ms);
  if (!anchor) return std::nullopt;
  return (static_cast<double>(*anchor - *ref) + row.similar_box->statistic(key)) / unit;
}

AxisDomain axis_domain(const Table& table, std::span<const std::string> ids,
                       const ViewState& view) {
  if (view.zoom_domain) return *view.zoom_domain;
  double lo = INFINITY;
  double hi = -INFINITY;
  auto include = [&](const ItemRow& row, std::string_view key) {
    if (const auto v = resolve_event_value(table, row, key, view)) {
      lo = std::min(lo, *v);
      hi = std::max(hi, *v);
    }
  };
  for (const auto& id : ids) {
    const ItemRow& row = table.at(id);
    for (const auto& e : view.visible_events) include(row, e);
    if (view.show_boxplot)
      for (auto s : kStatisticKeys) include(row, s);
  }
  if (lo > hi) return {-1, 1};
  const double span = hi - lo;
  if (span == 0) return {lo - 1, hi + 1};
  return {lo - 0.05 * span, hi + 0.05 * span};
}

std::vector<double> uniform_edges(AxisDomain domain, int bin_count) {
  std::vector<double> edges(static_cast<std::size_t>(bin_count) + 1);
  const double width = (domain.hi - domain.lo) / bin_count;
  for (int i = 0; i <= bin_count; ++i) edges[static_cast<std::size_t>(i)] = domain.lo + width * i;
  edges.back() = domain.hi;
  return edges;
}

std::optional<std::size_t> bin_index(std::span<const double> edges, double value) {
  if (edges.size() < 2 || !(value >= edges.front()) || !(value <= edges.back())) return std::nullopt;
  const std::size_t bins = edges.size() - 1;
  auto it = std::upper_bound(edges.begin(), edges.end(), value);
  const auto idx = static_cast<std::size_t>(it - edges.begin());
  return std::min(idx == 0 ? 0 : idx - 1, bins - 1);
}

EventBinGrid bin_event_counts(const Table& table, std::span<const std::string> ids,
                              std::string_view event_type, AxisDomain domain, int bin_count,
                              const ViewState& view) {
  if (bin_count < 1) throw InputError("bin_count must be at least 1");
  if (!(domain.lo < domain.hi) || !std::isfinite(domain.lo) || !std::isfinite(domain.hi))
    throw InputError("bin domain requires finite lo < hi");
  if (!table.has_event_type(event_type))
    throw InputError("unknown event type '" + std::string(event_type) + "'");
  EventBinGrid grid;
  grid.event_type = std::string(event_type);
  grid.bin_edges = uniform_edges(domain, bin_count);
  grid.counts.assign(static_cast<std::size_t>(bin_count), 0);
  for (const auto& id : ids) {
    const auto v = resolve_event_value(table, table.at(id), event_type, view);
    if (!v) continue;
    if (const auto idx = bin_index(grid.bin_edges, *v))
      ++grid.counts[*idx];
    else
      ++grid.excluded;
  }
  return grid;
}

ViewState zoom(ViewState view, AxisDomain domain) {
  if (!std::isfinite(domain.lo) || !std::isfinite(domain.hi) || !(domain.lo < domain.hi))
    throw InputError("zoom requires a domain with finite lo < hi");
  view.zoom_domain = domain;
  return view;
}

ViewState pan(ViewState view, double delta_units) {
  if (!std::isfinite(delta_units)) throw InputError("pan delta must be finite");
  if (view.zoom_domain) {
    view.zoom_domain->lo += delta_units;
    view.zoom_domain->hi += delta_units;
  }
  return view;
}

ViewState reset_zoom(ViewState view) {
  view.zoom_domain.reset();
  return view;
}

}  // namespace evtab
