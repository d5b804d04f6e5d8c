#include "evtab/ecommerce.hpp"

#include <cmath>
#include <map>
#include <unordered_map>

#include "evtab/csv.hpp"
#include "evtab/ingestion.hpp"
#include "rng.hpp"

namespace evtab {

namespace {

struct HeaderIndex {
  explicit HeaderIndex(const csv::Record& header, std::string_view file) : file_(file) {
    for (std::size_t i = 0; i < header.size(); ++i) index_[header[i]] = i;
  }
  std::size_t operator()(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw InputError(file_ + ": column '" + name + "' not found");
    return it->second;
  }

 private:
  std::string file_;
  std::unordered_map<std::string, std::size_t> index_;
};

std::vector<csv::Record> parse_file(const std::string& text, std::string_view name) {
  auto records = csv::parse(text);
  if (records.empty()) throw InputError(std::string(name) + ": missing header row");
  return records;
}

const std::string& field(const csv::Record& r, std::size_t i) {
  static const std::string kEmpty;
  return i < r.size() ? r[i] : kEmpty;
}

}  // namespace

OlistFiles read_olist_directory(const std::filesystem::path& directory) {
  return {read_text_file(directory / kOlistOrdersFile), read_text_file(directory / kOlistCustomersFile),
          read_text_file(directory / kOlistItemsFile)};
}

Table load_olist(const OlistFiles& files) {
  struct CustomerInfo {
    std::string city, state;
  };
  std::unordered_map<std::string, CustomerInfo> customers;
  {
    auto records = parse_file(files.customers_csv, kOlistCustomersFile);
    HeaderIndex col(records.front(), kOlistCustomersFile);
    const auto id = col("customer_id"), city = col("customer_city"), state = col("customer_state");
    for (std::size_t i = 1; i < records.size(); ++i)
      customers[field(records[i], id)] = {field(records[i], city), field(records[i], state)};
  }

  struct ItemTotals {
    double price = 0, freight = 0;
    int count = 0;
  };
  std::unordered_map<std::string, ItemTotals> items;
  {
    auto records = parse_file(files.order_items_csv, kOlistItemsFile);
    HeaderIndex col(records.front(), kOlistItemsFile);
    const auto order = col("order_id"), price = col("price"), freight = col("freight_value");
    for (std::size_t i = 1; i < records.size(); ++i) {
      const auto p = parse_decimal(field(records[i], price));
      const auto f = parse_decimal(field(records[i], freight));
      if (!p || !f)
        throw InputError(std::string(kOlistItemsFile) + ": row " + std::to_string(i) +
                         ": invalid price or freight_value");
      auto& t = items[field(records[i], order)];
      t.price += *p;
      t.freight += *f;
      ++t.count;
    }
  }

  static const std::pair<const char*, const char*> kEvents[] = {
      {"approved", "order_approved_at"},
      {"delivered_carrier", "order_delivered_carrier_date"},
      {"delivered_customer", "order_delivered_customer_date"},
      {"estimated_delivery", "order_estimated_delivery_date"},
      {"purchase", "order_purchase_timestamp"},
  };

  auto records = parse_file(files.orders_csv, kOlistOrdersFile);
  HeaderIndex col(records.front(), kOlistOrdersFile);
  const auto order_id = col("order_id"), customer_id = col("customer_id"),
             status = col("order_status");
  std::vector<std::pair<std::string, std::size_t>> event_cols;
  for (const auto& [key, source] : kEvents) event_cols.emplace_back(key, col(source));

  std::vector<ItemRow> rows;
  rows.reserve(records.size() - 1);
  for (std::size_t i = 1; i < records.size(); ++i) {
    const csv::Record& r = records[i];
    if (r.size() == 1 && r[0].empty()) continue;
    ItemRow row;
    row.id = field(r, order_id);
    if (!field(r, status).empty()) row.cells["order_status"] = field(r, status);
    if (auto c = customers.find(field(r, customer_id)); c != customers.end()) {
      if (!c->second.city.empty()) row.cells["customer_city"] = c->second.city;
      if (!c->second.state.empty()) row.cells["customer_state"] = c->second.state;
    }
    if (auto t = items.find(row.id); t != items.end()) {
      row.cells["price"] = t->second.price;
      row.cells["freight_value"] = t->second.freight;
      row.cells["item_count"] = static_cast<double>(t->second.count);
    }
    for (const auto& [key, c] : event_cols) {
      const std::string& text = field(r, c);
      if (text.empty()) continue;
      try {
        row.events[key] = parse_timestamp(text);
      } catch (const InputError& e) {
        throw InputError(std::string(kOlistOrdersFile) + ": row " + std::to_string(i) + ", column '" +
                         records.front()[c] + "': " + e.what());
      }
    }
    rows.push_back(std::move(row));
  }

  std::vector<ColumnDescriptor> descriptors{
      {"customer_city", ColumnType::categorical, std::nullopt},
      {"customer_state", ColumnType::categorical, std::nullopt},
      {"order_status", ColumnType::categorical, std::nullopt},
      {"price", ColumnType::number, "BRL"},
      {"freight_value", ColumnType::number, "BRL"},
      {"item_count", ColumnType::number, std::nullopt},
  };
  std::vector<std::string> event_types;
  for (const auto& [key, source] : kEvents) event_types.emplace_back(key);
  return build_table(std::move(descriptors), std::move(event_types), std::move(rows));
}

namespace {

struct Region {
  const char* state;
  double weight;
  // Relative distance from the main seller region; drives lead time and freight.
  double distance;
  const char* cities[3];
};

constexpr Region kRegions[] = {
    {"SP", 0.42, 0.15, {"sao paulo", "campinas", "santos"}},
    {"RJ", 0.13, 0.45, {"rio de janeiro", "niteroi", "nova iguacu"}},
    {"MG", 0.12, 0.45, {"belo horizonte", "uberlandia", "juiz de fora"}},
    {"RS", 0.06, 0.75, {"porto alegre", "caxias do sul", "pelotas"}},
    {"PR", 0.05, 0.55, {"curitiba", "londrina", "maringa"}},
    {"SC", 0.04, 0.65, {"florianopolis", "joinville", "blumenau"}},
    {"BA", 0.04, 1.0, {"salvador", "feira de santana", "vitoria da conquista"}},
    {"DF", 0.03, 0.8, {"brasilia", "taguatinga", "ceilandia"}},
    {"GO", 0.03, 0.8, {"goiania", "anapolis", "aparecida de goiania"}},
    {"PE", 0.03, 1.3, {"recife", "olinda", "jaboatao dos guararapes"}},
    {"CE", 0.03, 1.35, {"fortaleza", "caucaia", "juazeiro do norte"}},
    {"PA", 0.02, 1.6, {"belem", "ananindeua", "santarem"}},
};

std::string hex_id(detail::Rng& rng) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string s(32, '0');
  for (char& c : s) c = kHex[rng.index(16)];
  return s;
}

TimestampMs whole_seconds(double ms) {
  return static_cast<TimestampMs>(std::floor(ms / kMsPerSecond)) * kMsPerSecond;
}

}  // namespace

OlistFiles generate_olist_sample(int order_count, std::uint64_t seed, TimestampMs now) {
  if (order_count <= 0) throw InputError("order_count must be positive");
  detail::Rng rng(seed);
  std::vector<csv::Record> orders{{"order_id", "customer_id", "order_status",
                                   "order_purchase_timestamp", "order_approved_at",
                                   "order_delivered_carrier_date", "order_delivered_customer_date",
                                   "order_estimated_delivery_date"}};
  std::vector<csv::Record> customers{
      {"customer_id", "customer_unique_id", "customer_zip_code_prefix", "customer_city", "customer_state"}};
  std::vector<csv::Record> items{{"order_id", "order_item_id", "product_id", "seller_id",
                                  "shipping_limit_date", "price", "freight_value"}};
  const double day = static_cast<double>(kMsPerDay);
  const auto fmt_money = [](double v) { return format_number(std::round(v * 100) / 100); };

  for (int i = 0; i < order_count; ++i) {
    double pick = rng.uniform();
    const Region* region = &kRegions[0];
    for (const auto& r : kRegions) {
      region = &r;
      if ((pick -= r.weight) < 0) break;
    }
    const std::string city = region->cities[rng.index(3)];
    const std::string order_id = hex_id(rng);
    const std::string customer_id = hex_id(rng);
    customers.push_back({customer_id, hex_id(rng), std::to_string(10000 + rng.index(89999)), city,
                         region->state});

    const double purchase = static_cast<double>(now) - rng.uniform(0.0, 700.0) * day;
    const double approved = purchase + rng.uniform(0.2, 48.0) / 24.0 * day;
    const double carrier = approved + rng.uniform(0.5, 4.0) * day;
    const double transit = (2.0 + 10.0 * region->distance) * rng.uniform(0.5, 1.5);
    const double delivered = carrier + transit * day;
    const double estimated_days = 12.0 + 16.0 * region->distance + rng.uniform(0.0, 8.0);
    const TimestampMs estimated =
        static_cast<TimestampMs>(std::floor((purchase + estimated_days * day) / day)) * kMsPerDay;

    const bool carried = carrier <= static_cast<double>(now);
    const bool arrived = delivered <= static_cast<double>(now) && !rng.chance(0.01);
    orders.push_back({order_id, customer_id, arrived ? "delivered" : (carried ? "shipped" : "approved"),
                      format_timestamp(whole_seconds(purchase)),
                      format_timestamp(whole_seconds(approved)),
                      carried ? format_timestamp(whole_seconds(carrier)) : "",
                      arrived ? format_timestamp(whole_seconds(delivered)) : "",
                      format_timestamp(estimated)});

    const std::size_t n_items = 1 + (rng.chance(0.12) ? 1 + rng.index(2) : 0);
    for (std::size_t k = 0; k < n_items; ++k) {
      const double price = std::exp(rng.uniform(std::log(10.0), std::log(600.0)));
      const double freight = 6.0 + 28.0 * region->distance + 0.03 * price + rng.uniform(-3.0, 3.0);
      items.push_back({order_id, std::to_string(k + 1), hex_id(rng), hex_id(rng),
                       format_timestamp(whole_seconds(approved + 3 * day)), fmt_money(price),
                       fmt_money(std::max(0.0, freight))});
    }
  }
  return {csv::write(orders), csv::write(customers), csv::write(items)};
}

}  // namespace evtab
