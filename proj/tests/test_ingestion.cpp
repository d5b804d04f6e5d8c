#include <random>

#include "doctest.h"

#include "evtab/csv.hpp"
#include "evtab/ingestion.hpp"
#include "oracles.hpp"

using namespace evtab;

TEST_CASE("csv parser handles quotes, embedded separators and CRLF") {
  const auto records = csv::parse("a,b,c\r\n\"x, y\",\"he said \"\"hi\"\"\",\r\n\"multi\nline\",2,3\n");
  REQUIRE(records.size() == 3);
  CHECK(records[1] == csv::Record{"x, y", "he said \"hi\"", ""});
  CHECK(records[2][0] == "multi\nline");
  CHECK_THROWS_AS(csv::parse("a\n\"open"), InputError);
  CHECK(csv::parse(csv::write(records)) == records);
}

TEST_CASE("infer_column_type examples and precedence") {
  CHECK(infer_column_type({"true", "false", "true"}) == ColumnType::boolean);
  CHECK(infer_column_type({"1", "2.5", ""}) == ColumnType::number);
  CHECK(infer_column_type({"2017-10-02 10:56:33"}) == ColumnType::date);
  CHECK(infer_column_type({"SP", "RJ"}) == ColumnType::categorical);
  CHECK(infer_column_type({}) == ColumnType::categorical);
  CHECK(infer_column_type({"", " "}) == ColumnType::categorical);
  // Purely numeric 0/1 needs an alphabetic token to become boolean.
  CHECK(infer_column_type({"0", "1", "1"}) == ColumnType::number);
  CHECK(infer_column_type({"0", "TRUE"}) == ColumnType::boolean);
  CHECK(infer_column_type({"2017-10-02", "2017-10-02 00:00:01"}) == ColumnType::date);
  CHECK(infer_column_type({"2017-02-30"}) == ColumnType::categorical);
  CHECK(infer_column_type({"inf"}) == ColumnType::categorical);
  CHECK(infer_column_type({"1e3", "-2", "+4.5"}) == ColumnType::number);
}

TEST_CASE("infer_column_type is stable when adding a fitting token") {
  std::mt19937_64 rng(3);
  const std::vector<std::vector<std::string>> pools = {
      {"true", "false", "TRUE", "FALSE", "0", "1"},
      {"1", "2.5", "-3", "1e2", "0"},
      {"2020-01-01", "1999-12-31 23:59:59", "2024-02-29"},
      {"SP", "RJ", "x", "1"},
  };
  const ColumnType expected[] = {ColumnType::boolean, ColumnType::number, ColumnType::date,
                                 ColumnType::categorical};
  for (std::size_t p = 0; p < pools.size(); ++p) {
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<std::string> values{pools[p][0]};
      if (p == 3) values = {"SP"};
      for (int i = 0; i < 8; ++i) {
        values.push_back(pools[p][rng() % pools[p].size()]);
        CHECK(infer_column_type(values) == expected[p]);
      }
    }
  }
}

TEST_CASE("parse_timestamp examples") {
  CHECK(parse_timestamp("1970-01-01 00:00:00") == 0);
  CHECK(parse_timestamp("1970-01-02") == 86400000);
  CHECK(parse_timestamp("1969-12-31 23:59:59") == -1000);
  CHECK(parse_timestamp("2017-10-02 10:56:33") == 1506941793000);
  CHECK_THROWS_AS(parse_timestamp("not-a-date"), InputError);
  CHECK_THROWS_AS(parse_timestamp("2017-13-01"), InputError);
  CHECK_THROWS_AS(parse_timestamp("2017-10-02T10:56:33"), InputError);
  CHECK(format_timestamp(1506941793000) == "2017-10-02 10:56:33");
  CHECK(format_timestamp(-1000) == "1969-12-31 23:59:59");
}

TEST_CASE("parse_delimited_numbers examples") {
  CHECK(parse_delimited_numbers("1.5;2;3.25") == std::vector<double>{1.5, 2.0, 3.25});
  CHECK(parse_delimited_numbers("").empty());
  CHECK(parse_delimited_numbers(" 4 ; 5 ") == std::vector<double>{4, 5});
  try {
    parse_delimited_numbers("1;x;3");
    FAIL("expected an error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("token 'x'") != std::string::npos);
  }
}

namespace {

FieldMapping basic_mapping() {
  FieldMapping m;
  m.id = "order";
  m.data_columns = {"city", "freight"};
  m.event_data = {{"ship", "ship_date"}};
  m.similar_data_duration = "durations";
  m.similar_data_ids = "similar";
  return m;
}

}  // namespace

TEST_CASE("load_dataset maps the five fields") {
  const std::string text =
      "order,city,freight,ship_date,durations,similar\n"
      "o1,SP,10.5,2018-01-01,2;4;6,h1;h2;h3\n"
      "o2,RJ,,2018-01-02 12:00:00,,\n"
      "o3,SP,7,2018-01-03,1,h1;h2\n";
  const Table t = load_dataset(text, basic_mapping());
  REQUIRE(t.size() == 3);
  CHECK(t.descriptor("city")->kind == ColumnType::categorical);
  CHECK(t.descriptor("freight")->kind == ColumnType::number);
  for (const auto& r : t.rows()) CHECK(r.events.size() == 1);
  CHECK(is_missing(t.at("o2").cell("freight")));

  // Median over {2,4,6} days from the rank-counting oracle.
  const auto oracle = oracle::five_numbers({2.0 * kMsPerDay, 4.0 * kMsPerDay, 6.0 * kMsPerDay});
  REQUIRE(t.at("o1").similar_box);
  CHECK(t.at("o1").similar_box->median == oracle.median);
  CHECK(t.at("o1").similar_box->median == 345600000.0);
  CHECK(t.at("o1").similar_ids == std::vector<std::string>{"h1", "h2", "h3"});
  CHECK(t.at("o1").warnings.empty());
  CHECK_FALSE(t.at("o2").similar_box);
  // Length mismatch is a warning, not an error.
  REQUIRE(t.at("o3").warnings.size() == 1);
  CHECK(t.at("o3").warnings[0].find("mismatch") != std::string::npos);
}

TEST_CASE("load_dataset errors") {
  FieldMapping m = basic_mapping();
  m.event_data = {{"ship", "ship"}};
  try {
    load_dataset("order,city,freight,durations,similar\n", m);
    FAIL("expected an error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()) == "column 'ship' not found");
  }
  try {
    load_dataset("order,city,freight,ship_date,durations,similar\no1,SP,1,nope,,\n", basic_mapping());
    FAIL("expected an error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("row 1, column 'ship_date'") != std::string::npos);
  }
  CHECK_THROWS_WITH_AS(
      load_dataset("order,city,freight,ship_date,durations,similar\no1,SP,1,,1;q,\n", basic_mapping()),
      doctest::Contains("token 'q'"), InputError);
  CHECK_THROWS_WITH_AS(load_dataset("order,city,freight,ship_date,durations,similar\n"
                                    "o1,SP,1,,,\no1,RJ,2,,,\n",
                                    basic_mapping()),
                       doctest::Contains("duplicate row id o1"), InputError);
  CHECK_THROWS_WITH_AS(load_dataset("order,order,city,freight,ship_date,durations,similar\n", basic_mapping()),
                       doctest::Contains("more than once"), InputError);
}

TEST_CASE("duration unit converts similar durations to milliseconds") {
  const std::string text = "order,city,freight,ship_date,durations,similar\no1,SP,1,,1.5,\n";
  CHECK(load_dataset(text, basic_mapping(), DurationUnit::hours).at("o1").similar_box->max ==
        1.5 * kMsPerHour);
  CHECK(load_dataset(text, basic_mapping(), DurationUnit::ms).at("o1").similar_box->max == 1.5);
}

TEST_CASE("mapping JSON uses the five field names") {
  const FieldMapping m = basic_mapping();
  const auto j = mapping_to_json(m);
  for (const char* key : {"data_columns", "event_data", "similar_data_duration", "similar_data_ids", "id"})
    CHECK(j.contains(key));
  CHECK(mapping_from_json(j) == m);
  CHECK_THROWS_AS(mapping_from_json(nlohmann::json::object()), InputError);
}

TEST_CASE("generated steel data round-trips through export and reload") {
  const GeneratorConfig config{60, 5, parse_timestamp("2024-03-01 08:00:00")};
  for (const Table& t : {generate_steel_dataset(config), generate_steel_history(config)}) {
    const ExportedDataset out = export_dataset(t);
    CHECK(load_dataset(out.csv, out.mapping, out.duration_unit) == t);
  }
}

TEST_CASE("loaded tables round-trip including similar fields and warnings") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    std::string text = "order,city,freight,flag,when,ship_date,durations,similar\n";
    const int n = 1 + static_cast<int>(rng() % 12);
    for (int i = 0; i < n; ++i) {
      text += "o" + std::to_string(i) + ",";
      text += (rng() % 4 == 0 ? std::string() : std::string(1, static_cast<char>('A' + rng() % 3))) + ",";
      text += (rng() % 4 == 0 ? std::string() : format_number(static_cast<double>(rng() % 1000) / 8)) + ",";
      text += std::string(rng() % 2 ? "true" : "false") + ",";
      text += (rng() % 3 == 0 ? std::string() : format_timestamp(static_cast<TimestampMs>(rng() % 100000) * 1000)) + ",";
      text += (rng() % 3 == 0 ? std::string() : format_timestamp(static_cast<TimestampMs>(rng() % 100000) * 1000)) + ",";
      const int k = static_cast<int>(rng() % 4);
      std::string d, s;
      for (int j = 0; j < k; ++j) {
        d += (j ? ";" : "") + format_number(static_cast<double>(static_cast<int>(rng() % 200) - 20) / 4);
        s += (j ? ";" : "") + std::string("h") + std::to_string(rng() % 50);
      }
      if (rng() % 5 == 0) s += ";extra";
      text += d + "," + s + "\n";
    }
    FieldMapping m;
    m.id = "order";
    m.data_columns = {"city", "freight", "flag", "when"};
    m.event_data = {{"ship", "ship_date"}};
    m.similar_data_duration = "durations";
    m.similar_data_ids = "similar";
    const Table t = load_dataset(text, m);
    const ExportedDataset out = export_dataset(t);
    CHECK(load_dataset(out.csv, out.mapping, out.duration_unit) == t);
  }
}

TEST_CASE("steel generator contract") {
  const TimestampMs now = parse_timestamp("2024-03-01 08:00:00");
  CHECK(generate_steel_dataset({10, 1, now}) == generate_steel_dataset({10, 1, now}));
  CHECK(export_dataset(generate_steel_dataset({10, 1, now})).csv ==
        export_dataset(generate_steel_dataset({10, 1, now})).csv);
  CHECK_FALSE(generate_steel_dataset({10, 1, now}) == generate_steel_dataset({10, 2, now}));
  CHECK_THROWS_AS(generate_steel_dataset({0, 1, now}), InputError);
  CHECK_THROWS_AS(generate_steel_history({-3, 1, now}), InputError);

  const Table t = generate_steel_dataset({500, 42, now});
  CHECK(t.size() == 500);
  int galvanizing = 0;
  std::set<std::string> categories, warehouses;
  for (const auto& r : t.rows()) {
    CHECK(*r.event("hot_rolled") < now);
    CHECK(*r.event("hot_rolled") >= now - 30 * kMsPerDay);
    CHECK(now <= *r.event("shipping"));
    CHECK(*r.event("shipping") <= now + 60 * kMsPerDay + kMsPerSecond);
    CHECK_FALSE(r.event("pickled"));
    if (auto g = r.event("galvanizing_planned")) {
      ++galvanizing;
      CHECK(*g > now);
    }
    categories.insert(std::get<std::string>(r.cell("steel_category")));
    warehouses.insert(std::get<std::string>(r.cell("warehouse")));
    CHECK(std::holds_alternative<bool>(r.cell("urgent")));
    CHECK(std::holds_alternative<double>(r.cell("coil_width_mm")));
    CHECK(std::get<Timestamp>(r.cell("shipping_due")).ms == *r.event("shipping"));
  }
  CHECK(categories.size() == 5);
  CHECK(warehouses.size() == 3);
  CHECK(galvanizing > 150);
  CHECK(galvanizing < 250);

  const Table history = generate_steel_history({300, 42, now});
  for (const auto& r : history.rows()) {
    REQUIRE(r.event("pickled"));
    CHECK(*r.event("pickled") <= now);
    CHECK(*r.event("pickled") > *r.event("hot_rolled"));
  }
}
