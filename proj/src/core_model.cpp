#include "evtab/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace evtab {

std::string_view to_string(ColumnType kind) {
  switch (kind) {
    case ColumnType::boolean:
      return "boolean";
    case ColumnType::number:
      return "number";
    case ColumnType::categorical:
      return "categorical";
    case ColumnType::date:
      return "date";
  }
  return "categorical";
}

ColumnType column_type_from_string(std::string_view text) {
  if (text == "boolean") return ColumnType::boolean;
  if (text == "number") return ColumnType::number;
  if (text == "categorical") return ColumnType::categorical;
  if (text == "date") return ColumnType::date;
  throw InputError("unknown column type '" + std::string(text) + "'");
}

bool cell_matches_kind(const CellValue& v, ColumnType kind) {
  if (is_missing(v)) return true;
  switch (kind) {
    case ColumnType::boolean:
      return std::holds_alternative<bool>(v);
    case ColumnType::number:
      return std::holds_alternative<double>(v);
    case ColumnType::categorical:
      return std::holds_alternative<std::string>(v);
    case ColumnType::date:
      return std::holds_alternative<Timestamp>(v);
  }
  return false;
}

bool is_statistic_key(std::string_view key) {
  return std::find(std::begin(kStatisticKeys), std::end(kStatisticKeys), key) !=
         std::end(kStatisticKeys);
}

bool is_reserved_key(std::string_view key) { return key == kCurrentTime || is_statistic_key(key); }

double BoxplotSummary::statistic(std::string_view key) const {
  if (key == kStatMin) return min;
  if (key == kStatQ1) return q1;
  if (key == kStatMedian) return median;
  if (key == kStatQ3) return q3;
  if (key == kStatMax) return max;
  throw InputError("unknown statistic key '" + std::string(key) + "'");
}

const CellValue& ItemRow::cell(std::string_view column) const {
  static const CellValue kMissing{Missing{}};
  auto it = cells.find(column);
  return it == cells.end() ? kMissing : it->second;
}

std::optional<TimestampMs> ItemRow::event(std::string_view key) const {
  auto it = events.find(key);
  if (it == events.end()) return std::nullopt;
  return it->second;
}

const ItemRow* Table::find(std::string_view id) const {
  auto it = row_index_.find(std::string(id));
  return it == row_index_.end() ? nullptr : &rows_[it->second];
}

const ItemRow& Table::at(std::string_view id) const {
  if (const ItemRow* row = find(id)) return *row;
  throw NotFoundError("unknown item id '" + std::string(id) + "'");
}

const ColumnDescriptor* Table::descriptor(std::string_view name) const {
  for (const auto& d : descriptors_)
    if (d.name == name) return &d;
  return nullptr;
}

bool Table::has_event_type(std::string_view key) const {
  return std::find(event_types_.begin(), event_types_.end(), key) != event_types_.end();
}

Table build_table(std::vector<ColumnDescriptor> descriptors, std::vector<std::string> event_types,
                  std::vector<ItemRow> rows) {
  std::set<std::string, std::less<>> event_set;
  for (const auto& key : event_types) {
    if (key.empty()) throw InputError("empty event type key");
    if (is_statistic_key(key))
      throw InputError("reserved statistic key '" + key + "' used as event type");
    if (key == kCurrentTime)
      throw InputError("reserved reference token '" + key + "' used as event type");
    if (!event_set.insert(key).second) throw InputError("duplicate event type '" + key + "'");
  }

  std::set<std::string, std::less<>> column_set;
  for (const auto& d : descriptors) {
    if (d.name.empty()) throw InputError("empty column name");
    if (!column_set.insert(d.name).second)
      throw InputError("duplicate column name '" + d.name + "'");
    if (is_reserved_key(d.name)) throw InputError("column '" + d.name + "' uses a reserved key");
    if (event_set.contains(d.name))
      throw InputError("column '" + d.name + "' collides with an event type");
  }

  Table table;
  table.row_index_.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const ItemRow& row = rows[i];
    if (row.id.empty()) throw InputError("row " + std::to_string(i) + " has an empty id");
    if (!table.row_index_.emplace(row.id, i).second)
      throw InputError("duplicate row id " + row.id);
    for (const auto& [name, value] : row.cells) {
      auto it = std::find_if(descriptors.begin(), descriptors.end(),
                             [&](const ColumnDescriptor& d) { return d.name == name; });
      if (it == descriptors.end())
        throw InputError("row " + row.id + ": undeclared column '" + name + "'");
      if (!cell_matches_kind(value, it->kind))
        throw InputError("row " + row.id + ": cell kind mismatch in column '" + name +
                         "' (expected " + std::string(to_string(it->kind)) + ")");
      if (const double* x = std::get_if<double>(&value); x && !std::isfinite(*x))
        throw InputError("row " + row.id + ": non-finite number in column '" + name + "'");
    }
    for (const auto& [key, ts] : row.events) {
      if (is_reserved_key(key))
        throw InputError("row " + row.id + ": reserved statistic key '" + key + "' used as event");
      if (!event_set.contains(key))
        throw InputError("row " + row.id + ": undeclared event key '" + key + "'");
    }
    if (row.similar_box) {
      const BoxplotSummary& b = *row.similar_box;
      if (!(b.min <= b.q1 && b.q1 <= b.median && b.median <= b.q3 && b.q3 <= b.max))
        throw InputError("row " + row.id + ": boxplot statistics are not ordered");
    }
  }

  table.descriptors_ = std::move(descriptors);
  table.event_types_ = std::move(event_types);
  table.rows_ = std::move(rows);
  return table;
}

namespace {

std::weak_ordering order_of(std::partial_ordering p) {
  if (p == std::partial_ordering::less) return std::weak_ordering::less;
  if (p == std::partial_ordering::greater) return std::weak_ordering::greater;
  return std::weak_ordering::equivalent;
}

}  // namespace

std::weak_ordering compare_cells(const CellValue& a, const CellValue& b, ColumnType kind) {
  if (!cell_matches_kind(a, kind) || !cell_matches_kind(b, kind))
    throw InputError("compare_cells: value does not match column kind " +
                     std::string(to_string(kind)));
  const bool am = is_missing(a);
  const bool bm = is_missing(b);
  if (am || bm) {
    if (am && bm) return std::weak_ordering::equivalent;
    return am ? std::weak_ordering::greater : std::weak_ordering::less;
  }
  switch (kind) {
    case ColumnType::boolean:
      return std::get<bool>(a) <=> std::get<bool>(b);
    case ColumnType::number:
      return order_of(std::get<double>(a) <=> std::get<double>(b));
    case ColumnType::categorical:
      return std::get<std::string>(a) <=> std::get<std::string>(b);
    case ColumnType::date:
      return std::get<Timestamp>(a).ms <=> std::get<Timestamp>(b).ms;
  }
  return std::weak_ordering::equivalent;
}

}  // namespace evtab
