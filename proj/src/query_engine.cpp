#include "evtab/query_engine.hpp"

#include <algorithm>
#include <numeric>
#include <optional>

#include "evtab/ingestion.hpp"
#include "evtab/similarity.hpp"

namespace evtab {

namespace {

bool passes(const FilterSpec& f, const CellValue& cell) {
  if (is_missing(cell)) {
    const auto* c = std::get_if<CategoryIn>(&f.predicate);
    return c && c->tokens.contains(std::string(kMissingToken));
  }
  if (const auto* c = std::get_if<CategoryIn>(&f.predicate))
    return c->tokens.contains(std::get<std::string>(cell));
  if (const auto* r = std::get_if<Range>(&f.predicate)) {
    const double v = std::holds_alternative<Timestamp>(cell)
                         ? static_cast<double>(std::get<Timestamp>(cell).ms)
                         : std::get<double>(cell);
    return (!r->lo || v >= *r->lo) && (!r->hi || v <= *r->hi);
  }
  if (const auto* e = std::get_if<Equals>(&f.predicate)) return std::get<bool>(cell) == e->value;
  return std::get<std::string>(cell).find(std::get<TextContains>(f.predicate).substring) !=
         std::string::npos;
}

}  // namespace

std::vector<std::string> apply_filters(const Table& table, const std::vector<FilterSpec>& filters) {
  for (const auto& f : filters) validate_filter(f, table);
  std::vector<std::string> ids;
  for (const auto& row : table.rows()) {
    const bool keep = std::all_of(filters.begin(), filters.end(),
                                  [&](const FilterSpec& f) { return passes(f, row.cell(f.column)); });
    if (keep) ids.push_back(row.id);
  }
  return ids;
}

namespace {

struct KeyPlan {
  const ColumnDescriptor* column = nullptr;  // attribute key when set
  std::string target;
  bool descending = false;
};

// Present values compare by `cmp` in the key's direction; absent ones last.
template <typename T, typename Cmp>
std::weak_ordering absent_last(const std::optional<T>& a, const std::optional<T>& b, bool descending,
                               Cmp cmp) {
  if (!a || !b) {
    if (!a && !b) return std::weak_ordering::equivalent;
    return !a ? std::weak_ordering::greater : std::weak_ordering::less;
  }
  const std::weak_ordering c = cmp(*a, *b);
  return descending ? 0 <=> c : c;
}

}  // namespace

std::vector<std::string> sort_rows(const Table& table, std::vector<std::string> ids,
                                   const SortSpec& sort, const ViewState& view) {
  validate_sort(sort, table);
  if (sort.keys.empty()) return ids;

  std::vector<KeyPlan> plans;
  for (const auto& key : sort.keys)
    plans.push_back({table.descriptor(key.target), key.target,
                     key.direction == SortDirection::descending});

  const std::size_t n = ids.size();
  const std::size_t k = plans.size();
  std::vector<const ItemRow*> rows(n);
  std::vector<std::optional<double>> resolved(n * k);
  for (std::size_t i = 0; i < n; ++i) {
    rows[i] = &table.at(ids[i]);
    for (std::size_t j = 0; j < k; ++j)
      if (!plans[j].column)
        resolved[i * k + j] = resolve_event_value(table, *rows[i], plans[j].target, view);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    for (std::size_t j = 0; j < k; ++j) {
      std::weak_ordering c = std::weak_ordering::equivalent;
      if (const ColumnDescriptor* col = plans[j].column) {
        const CellValue& ca = rows[a]->cell(col->name);
        const CellValue& cb = rows[b]->cell(col->name);
        auto wrap = [](const CellValue& v) {
          return is_missing(v) ? std::nullopt : std::optional<const CellValue*>(&v);
        };
        c = absent_last(wrap(ca), wrap(cb), plans[j].descending,
                        [&](const CellValue* x, const CellValue* y) {
                          return compare_cells(*x, *y, col->kind);
                        });
      } else {
        c = absent_last(resolved[a * k + j], resolved[b * k + j], plans[j].descending,
                        [](double x, double y) {
                          return x < y   ? std::weak_ordering::less
                                 : y < x ? std::weak_ordering::greater
                                         : std::weak_ordering::equivalent;
                        });
      }
      if (c != 0) return c < 0;
    }
    return false;
  });

  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i : order) out.push_back(std::move(ids[i]));
  return out;
}

namespace {

std::string cell_label(const CellValue& v) {
  if (const auto* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  return std::string(kMissingToken);
}

std::string bin_label(double lo, double hi, bool last, ColumnType kind) {
  auto fmt = [&](double x) {
    return kind == ColumnType::date ? format_timestamp(static_cast<TimestampMs>(x)) : format_number(x);
  };
  return "[" + fmt(lo) + ", " + fmt(hi) + (last ? "]" : ")");
}

}  // namespace

std::vector<Group> group_rows(const Table& table, std::span<const std::string> ids,
                              std::string_view column, std::span<const double> edges) {
  const ColumnDescriptor* d = table.descriptor(column);
  if (!d) throw InputError("group_by: unknown column '" + std::string(column) + "'");
  Group missing{std::string(kMissingToken), {}};
  Group out_of_range{std::string(kOutOfRangeGroup), {}};
  std::vector<Group> groups;

  if (d->kind == ColumnType::categorical || d->kind == ColumnType::boolean) {
    std::vector<std::pair<CellValue, std::vector<std::string>>> buckets;
    for (const auto& id : ids) {
      const CellValue& v = table.at(id).cell(column);
      if (is_missing(v)) {
        missing.ids.push_back(id);
        continue;
      }
      auto it = std::find_if(buckets.begin(), buckets.end(),
                             [&](const auto& b) { return b.first == v; });
      if (it == buckets.end()) {
        buckets.emplace_back(v, std::vector<std::string>{});
        it = std::prev(buckets.end());
      }
      it->second.push_back(id);
    }
    std::stable_sort(buckets.begin(), buckets.end(), [&](const auto& a, const auto& b) {
      return compare_cells(a.first, b.first, d->kind) < 0;
    });
    for (auto& [value, members] : buckets) groups.push_back({cell_label(value), std::move(members)});
  } else {
    if (edges.size() < 2)
      throw InputError("group_by: column '" + std::string(column) + "' needs at least two bin edges");
    for (std::size_t i = 1; i < edges.size(); ++i)
      if (!(edges[i - 1] < edges[i])) throw InputError("group_by: bin edges must be strictly ascending");
    const std::size_t bins = edges.size() - 1;
    std::vector<std::vector<std::string>> members(bins);
    for (const auto& id : ids) {
      const CellValue& v = table.at(id).cell(column);
      if (is_missing(v)) {
        missing.ids.push_back(id);
        continue;
      }
      const double x = std::holds_alternative<Timestamp>(v)
                           ? static_cast<double>(std::get<Timestamp>(v).ms)
                           : std::get<double>(v);
      if (const auto idx = bin_index(edges, x))
        members[*idx].push_back(id);
      else
        out_of_range.ids.push_back(id);
    }
    for (std::size_t i = 0; i < bins; ++i) {
      if (members[i].empty()) continue;
      groups.push_back({bin_label(edges[i], edges[i + 1], i + 1 == bins, d->kind), std::move(members[i])});
    }
  }
  if (!out_of_range.ids.empty()) groups.push_back(std::move(out_of_range));
  if (!missing.ids.empty()) groups.push_back(std::move(missing));
  return groups;
}

GroupAggregate aggregate_group(const Table& table, const Group& group, const ViewState& view,
                               AxisDomain domain) {
  GroupAggregate agg;
  agg.group_key = group.key;
  agg.row_count = static_cast<int>(group.ids.size());
  for (const auto& e : table.event_types())
    if (view.visible_events.contains(e))
      agg.event_heatmaps.push_back(bin_event_counts(table, group.ids, e, domain, view.bin_count, view));
  for (const auto& d : table.descriptors()) {
    if (d.kind == ColumnType::categorical || d.kind == ColumnType::boolean) {
      auto& hist = agg.categorical_histograms[d.name];
      for (const auto& id : group.ids) {
        const CellValue& v = table.at(id).cell(d.name);
        if (!is_missing(v)) ++hist[cell_label(v)];
      }
    } else if (d.kind == ColumnType::number) {
      std::vector<double> values;
      for (const auto& id : group.ids)
        if (const auto* x = std::get_if<double>(&table.at(id).cell(d.name))) values.push_back(*x);
      if (!values.empty()) agg.numeric_boxplots.emplace(d.name, five_number_summary(values));
    }
  }
  return agg;
}

RowLayout layout_rows(std::span<const std::string> ids, const ViewState& view) {
  RowLayout layout;
  layout.reserve(ids.size());
  for (const auto& id : ids) {
    const bool full = !view.overview || (view.selected && *view.selected == id);
    layout.push_back({id, full ? HeightClass::full : HeightClass::compressed});
  }
  return layout;
}

SimilarView similar_view(const Table& candidates, const Table& history,
                         std::string_view selected_id, TimestampMs now_ms) {
  const ItemRow& selected = candidates.at(selected_id);
  SimilarView out;
  out.view = default_view_state(history, now_ms);
  for (const auto& id : selected.similar_ids) {
    if (history.find(id))
      out.ids.push_back(id);
    else
      out.warnings.push_back(id + " not found");
  }
  return out;
}

}  // namespace evtab
