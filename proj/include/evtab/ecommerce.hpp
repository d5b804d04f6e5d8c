#pragma once

// Adapter for the Brazilian e-commerce (Olist) public dataset layout, and a
// generator producing files with the same schema.
//
// Join strategy: one row per order from the orders file; the customers file
// is joined on customer_id (city, state); the order-items file is
// aggregated per order_id (summed price and freight_value, item count).
// Orders without a matching customer keep missing city/state; orders
// without items keep missing price/freight.

#include <filesystem>
#include <string>

#include "evtab/core_model.hpp"

namespace evtab {

struct OlistFiles {
  std::string orders_csv;
  std::string customers_csv;
  std::string order_items_csv;
};

inline constexpr const char* kOlistOrdersFile = "olist_orders_dataset.csv";
inline constexpr const char* kOlistCustomersFile = "olist_customers_dataset.csv";
inline constexpr const char* kOlistItemsFile = "olist_order_items_dataset.csv";

/// Reads the three files from `directory` by their public file names.
OlistFiles read_olist_directory(const std::filesystem::path& directory);

/// Event keys: purchase, approved, delivered_carrier, delivered_customer,
/// estimated_delivery. Columns: customer_city, customer_state, order_status,
/// price, freight_value, item_count.
Table load_olist(const OlistFiles& files);

/// Synthetic orders in the public schema. Delivery lead time and freight both
/// grow with the destination's distance from the main seller region;
/// estimated delivery dates are set conservatively later than typical
/// deliveries. Orders whose delivery would fall after `now` stay undelivered.
OlistFiles generate_olist_sample(int order_count, std::uint64_t seed, TimestampMs now);

}  // namespace evtab
