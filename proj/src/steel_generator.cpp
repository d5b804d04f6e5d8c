#include <cmath>

#include "evtab/ingestion.hpp"
#include "rng.hpp"

namespace evtab {

namespace {

using detail::Rng;

TimestampMs floor_seconds(TimestampMs ms) {
  const TimestampMs r = ms % kMsPerSecond;
  return r < 0 ? ms - r - kMsPerSecond : ms - r;
}

TimestampMs ceil_seconds(TimestampMs ms) {
  const TimestampMs f = floor_seconds(ms);
  return f == ms ? f : f + kMsPerSecond;
}

TimestampMs days_ms(double days) { return static_cast<TimestampMs>(std::llround(days * kMsPerDay)); }

std::vector<ColumnDescriptor> steel_descriptors() {
  return {{"steel_category", ColumnType::categorical, std::nullopt},
          {"coil_width_mm", ColumnType::number, std::nullopt},
          {"warehouse", ColumnType::categorical, std::nullopt},
          {"urgent", ColumnType::boolean, std::nullopt},
          {"shipping_due", ColumnType::date, std::nullopt}};
}

// Same order load_dataset produces, so exports reload to equal tables.
std::vector<std::string> steel_event_types() {
  return {"galvanizing_planned", "hot_rolled", "pickled", "shipping"};
}

void fill_attributes(Rng& rng, ItemRow& row, std::size_t& category) {
  category = rng.index(std::size(kSteelCategories));
  row.cells["steel_category"] = std::string(kSteelCategories[category]);
  row.cells["coil_width_mm"] = 900.0 + 10.0 * static_cast<double>(rng.index(91));
  row.cells["warehouse"] = std::string(kSteelWarehouses[rng.index(std::size(kSteelWarehouses))]);
  row.cells["urgent"] = rng.chance(0.1);
}

// Storage time before pickling grows with category hardness and coil width.
double storage_days(Rng& rng, std::size_t category, double width_mm, bool galvanizing) {
  static constexpr double kBaseDays[] = {6, 9, 14, 20, 28};
  const double base = kBaseDays[category] + 6.0 * (width_mm - 900.0) / 900.0 + (galvanizing ? 4 : 0);
  return std::max(3.0, base * rng.uniform(0.6, 1.4));
}

std::string padded_id(char prefix, int i, int width) {
  std::string digits = std::to_string(i);
  return prefix + std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(digits.size()))), '0') + digits;
}

void check_config(const GeneratorConfig& config) {
  if (config.row_count <= 0) throw InputError("row_count must be positive");
}

}  // namespace

Table generate_steel_dataset(const GeneratorConfig& config) {
  check_config(config);
  Rng rng(config.seed);
  std::vector<ItemRow> rows;
  rows.reserve(static_cast<std::size_t>(config.row_count));
  for (int i = 0; i < config.row_count; ++i) {
    ItemRow row;
    row.id = padded_id('C', i + 1, 4);
    std::size_t category = 0;
    fill_attributes(rng, row, category);
    row.events["hot_rolled"] = floor_seconds(config.now - days_ms(rng.uniform(0.5, 30.0)));
    row.events["shipping"] = ceil_seconds(config.now + days_ms(rng.uniform(1.0, 60.0)));
    row.cells["shipping_due"] = Timestamp{row.events["shipping"]};
    if (rng.chance(0.4))
      row.events["galvanizing_planned"] = ceil_seconds(config.now + days_ms(rng.uniform(1.0, 45.0)));
    rows.push_back(std::move(row));
  }
  return build_table(steel_descriptors(), steel_event_types(), std::move(rows));
}

Table generate_steel_history(const GeneratorConfig& config) {
  check_config(config);
  Rng rng(config.seed ^ 0x9E3779B97F4A7C15ULL);
  std::vector<ItemRow> rows;
  rows.reserve(static_cast<std::size_t>(config.row_count));
  for (int i = 0; i < config.row_count; ++i) {
    ItemRow row;
    row.id = padded_id('H', i + 1, 5);
    std::size_t category = 0;
    fill_attributes(rng, row, category);
    const bool galvanizing = rng.chance(0.4);
    const double storage = storage_days(rng, category, std::get<double>(row.cells["coil_width_mm"]),
                                        galvanizing);
    const double pickled_ago = rng.uniform(1.0, 365.0);
    const TimestampMs pickled = floor_seconds(config.now - days_ms(pickled_ago));
    const TimestampMs hot_rolled = floor_seconds(pickled - days_ms(storage));
    row.events["hot_rolled"] = hot_rolled;
    row.events["pickled"] = pickled;
    row.events["shipping"] = ceil_seconds(pickled + days_ms(rng.uniform(1.0, 20.0)));
    row.cells["shipping_due"] = Timestamp{row.events["shipping"]};
    if (galvanizing)
      row.events["galvanizing_planned"] = ceil_seconds(pickled + days_ms(rng.uniform(0.5, 10.0)));
    rows.push_back(std::move(row));
  }
  return build_table(steel_descriptors(), steel_event_types(), std::move(rows));
}

FieldMapping steel_mapping(bool with_similar_fields) {
  FieldMapping m;
  m.id = "id";
  m.data_columns = {"steel_category", "coil_width_mm", "warehouse", "urgent", "shipping_due"};
  m.event_data = {{"hot_rolled", "hot_rolled_date"},
                  {"galvanizing_planned", "galvanizing_planned_date"},
                  {"pickled", "pickled_date"},
                  {"shipping", "shipping_date"}};
  if (with_similar_fields) {
    m.similar_data_duration = "similar_data_duration";
    m.similar_data_ids = "similar_data_ids";
  }
  return m;
}

}  // namespace evtab
