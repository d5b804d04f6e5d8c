// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Tolerances and sizes are fixed here.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "evtab/ecommerce.hpp"
#include "evtab/event_engine.hpp"
#include "evtab/query_engine.hpp"
#include "evtab/session.hpp"
#include "evtab/similarity.hpp"
#include "evtab/view_model.hpp"

#include "../oracles.hpp"
#include "../test_support.hpp"

namespace {

using namespace evtab;
using evtab::testing::kNow;
using Clock = std::chrono::steady_clock;

constexpr double kExact = 1e-9;

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

std::vector<std::string> ids_of(const Table& t) {
  std::vector<std::string> ids;
  for (const auto& r : t.rows()) ids.push_back(r.id);
  return ids;
}

Outcome quantile_oracle() {
  std::mt19937_64 rng(101);
  double worst = 0, library_seconds = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng() % 500;
    std::vector<double> xs(n);
    std::normal_distribution<double> normal(0, 1e8);
    for (auto& x : xs) x = trial % 2 ? std::round(normal(rng) / 1e7) * 1e7 : normal(rng);
    const auto start = Clock::now();
    const BoxplotSummary box = five_number_summary(xs);
    library_seconds += seconds_since(start);
    const auto ref = oracle::five_numbers(xs);
    for (auto [got, want] : {std::pair{box.min, ref.min}, {box.q1, ref.q1}, {box.median, ref.median},
                             {box.q3, ref.q3}, {box.max, ref.max}})
      worst = std::max(worst, std::abs(got - want));
  }
  return {worst <= kExact && library_seconds < 5.0,
          "1000 lists, max |diff| = " + fmt(worst) + ", runtime " + fmt(library_seconds) + " s"};
}

Outcome shift_invariance() {
  std::mt19937_64 rng(202);
  const Table base = evtab::testing::random_table(rng, 500, "r", 0.1);
  const std::vector<std::string> keys{"a", "b", "c", "min", "q1", "median", "q3", "max"};
  const std::vector<std::string> events{"a", "b", "c"};
  double worst_aligned = 0, worst_now = 0;
  long checked = 0;
  bool presence_ok = true;
  for (TimestampMs delta : {TimestampMs{1}, TimestampMs{-1}, kMsPerDay, -kMsPerDay, 400 * kMsPerDay,
                            -400 * kMsPerDay}) {
    std::vector<ItemRow> rows = base.rows();
    for (auto& r : rows)
      for (auto& [k, ts] : r.events) ts += delta;
    const Table shifted = build_table(base.descriptors(), base.event_types(), std::move(rows));
    for (const auto& anchor : events) {
      for (const std::string ref : {"CURRENT_TIME", "a", "b", "c"}) {
        ViewState v = default_view_state(base, kNow);
        v.reference = ref;
        v.boxplot_anchor = anchor;
        for (std::size_t i = 0; i < base.size(); ++i) {
          for (const auto& key : keys) {
            const auto x = resolve_event_value(base, base.rows()[i], key, v);
            const auto y = resolve_event_value(shifted, shifted.rows()[i], key, v);
            if (x.has_value() != y.has_value()) presence_ok = false;
            if (!x || !y) continue;
            ++checked;
            if (ref == kCurrentTime) {
              const double expected = static_cast<double>(delta) / static_cast<double>(v.time_unit_ms);
              worst_now = std::max(worst_now, std::abs((*y - *x) - expected));
            } else {
              worst_aligned = std::max(worst_aligned, std::abs(*y - *x));
            }
          }
        }
      }
    }
  }
  return {presence_ok && worst_aligned <= kExact && worst_now <= kExact,
          std::to_string(checked) + " values, event-ref max drift " + fmt(worst_aligned) +
              ", CURRENT_TIME max |shift - delta/unit| " + fmt(worst_now)};
}

Outcome sort_oracle() {
  std::mt19937_64 rng(303);
  const std::vector<std::string> targets{"city", "width", "flag", "due", "a", "b", "c",
                                         "min", "q1", "median", "q3", "max"};
  const std::vector<std::string> refs{"CURRENT_TIME", "a", "b", "c"};
  int mismatches = 0, unstable = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Table seed_table = evtab::testing::random_table(rng, 1 + static_cast<int>(rng() % 80));
    // Tagged duplicates: identical content under distinct ids.
    std::vector<ItemRow> rows = seed_table.rows();
    std::map<std::string, std::string> origin;
    const std::size_t dups = std::min<std::size_t>(100 - rows.size(), 1 + rng() % 20);
    for (std::size_t k = 0; k < dups; ++k) {
      ItemRow copy = seed_table.rows()[rng() % seed_table.size()];
      origin[copy.id + "#" + std::to_string(k)] = copy.id;
      copy.id += "#" + std::to_string(k);
      rows.push_back(std::move(copy));
    }
    for (const auto& r : seed_table.rows()) origin[r.id] = r.id;
    const Table t = build_table(seed_table.descriptors(), seed_table.event_types(), std::move(rows));

    ViewState v = default_view_state(t, kNow);
    v.reference = refs[rng() % refs.size()];
    v.boxplot_anchor = refs[rng() % refs.size()];
    SortSpec spec;
    const int nkeys = 1 + static_cast<int>(rng() % 3);
    for (int k = 0; k < nkeys; ++k)
      spec.keys.push_back({targets[rng() % targets.size()],
                           rng() % 2 ? SortDirection::ascending : SortDirection::descending});
    auto input = ids_of(t);
    std::shuffle(input.begin(), input.end(), rng);
    const auto got = sort_rows(t, input, spec, v);
    if (got != oracle::sort_ids(t, input, spec, v)) ++mismatches;

    std::map<std::string, std::size_t> input_pos;
    for (std::size_t i = 0; i < input.size(); ++i) input_pos[input[i]] = i;
    std::map<std::string, std::size_t> last_seen;
    for (const auto& id : got) {
      const auto& group = origin.at(id);
      const auto it = last_seen.find(group);
      if (it != last_seen.end() && it->second > input_pos[id]) ++unstable;
      last_seen[group] = input_pos[id];
    }
  }
  return {mismatches == 0 && unstable == 0,
          "200 tables, " + std::to_string(mismatches) + " permutation mismatches, " +
              std::to_string(unstable) + " stability violations"};
}

Outcome bin_conservation() {
  std::mt19937_64 rng(404);
  const std::vector<std::string> refs{"CURRENT_TIME", "a", "b", "c"};
  int violations = 0, boundary_checks = 0, boundary_failures = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Table t = evtab::testing::random_table(rng, 1 + static_cast<int>(rng() % 150));
    ViewState v = default_view_state(t, kNow);
    v.reference = refs[rng() % refs.size()];
    const std::string event = std::string(1, static_cast<char>('a' + rng() % 3));
    std::vector<std::string> ids;
    std::vector<double> present;
    for (const auto& r : t.rows()) {
      if (rng() % 3 == 0) continue;
      ids.push_back(r.id);
      if (auto x = oracle::resolved(r, event, v)) present.push_back(*x);
    }
    AxisDomain domain{-10.0 + static_cast<double>(rng() % 15), 0};
    domain.hi = domain.lo + 0.5 + static_cast<double>(rng() % 20);
    std::string boundary_id;
    if (!present.empty() && trial % 2 == 0) {
      // Put the domain's upper edge exactly on a present value.
      for (const auto& id : ids)
        if (auto x = oracle::resolved(t.at(id), event, v)) {
          domain.hi = *x;
          domain.lo = *x - 1.0 - static_cast<double>(rng() % 10);
          boundary_id = id;
          break;
        }
    }
    const int bins = 1 + static_cast<int>(rng() % 40);
    const auto grid = bin_event_counts(t, ids, event, domain, bins, v);
    long total = grid.excluded;
    for (int c : grid.counts) total += c;
    if (total != static_cast<long>(present.size())) ++violations;
    if (!boundary_id.empty()) {
      ++boundary_checks;
      const std::vector<std::string> one{boundary_id};
      const auto g = bin_event_counts(t, one, event, domain, bins, v);
      if (g.counts.back() != 1 || g.excluded != 0) ++boundary_failures;
    }
  }
  return {violations == 0 && boundary_failures == 0 && boundary_checks > 0,
          "200 cases, " + std::to_string(violations) + " conservation violations, " +
              std::to_string(boundary_failures) + "/" + std::to_string(boundary_checks) +
              " boundary values outside the last bin"};
}

Outcome similarity_oracle() {
  std::mt19937_64 rng(505);
  int mismatches = 0, leaks = 0, nonempty = 0;
  long derived = 0;
  double worst_summary = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Table history = evtab::testing::random_table(rng, 1 + static_cast<int>(rng() % 200), "h");
    const Table queries = evtab::testing::random_table(rng, 3, "q");
    const SimilaritySpec spec = evtab::testing::random_spec(rng);
    std::vector<const ItemRow*> probe;
    for (const auto& q : queries.rows()) probe.push_back(&q);
    probe.push_back(&history.rows()[rng() % history.size()]);  // exercises self-exclusion
    for (const ItemRow* q : probe) {
      const SimilarSet got = derive_similar_items(*q, history, spec);
      const auto want = oracle::similar_items(*q, history, spec);
      if (got.ids != want.ids || got.durations_ms != want.durations) ++mismatches;
      if (!got.ids.empty()) {
        ++nonempty;
        if (!got.summary) {
          ++mismatches;
        } else {
          const auto ref = oracle::five_numbers(want.durations);
          worst_summary = std::max({worst_summary, std::abs(got.summary->min - ref.min),
                                    std::abs(got.summary->median - ref.median),
                                    std::abs(got.summary->max - ref.max)});
        }
      }
      for (const auto& id : got.ids) {
        ++derived;
        if (id == q->id || *history.at(id).event(spec.target_event) > spec.as_of) ++leaks;
      }
    }
  }
  return {mismatches == 0 && leaks == 0 && worst_summary <= kExact && nonempty > 0,
          "1000 specs, " + std::to_string(mismatches) + " mismatches, " + std::to_string(leaks) +
              " leaking items among " + std::to_string(derived) + " derived"};
}

std::optional<double> median_of(std::vector<double> xs) {
  if (xs.empty()) return std::nullopt;
  return five_number_summary(xs).median;
}

Outcome ecommerce_directional() {
  const auto start = Clock::now();
  OlistFiles files;
  std::string source;
  if (const char* dir = std::getenv("EVTAB_OLIST_DIR"); dir && *dir) {
    files = read_olist_directory(dir);
    source = std::string("public dataset at ") + dir;
  } else {
    files = generate_olist_sample(8000, 7, parse_timestamp("2018-10-01"));
    source = "synthetic Olist-schema sample";
  }
  const Table orders = load_olist(files);

  SimilaritySpec spec;
  spec.matchers = {{"customer_city", ExactMatch{}}, {"", Recency{20, "delivered_customer"}}};
  spec.source_event = "approved";
  spec.target_event = "delivered_customer";
  // Snapshot time: the latest purchase in the data.
  spec.as_of = 0;
  for (const auto& r : orders.rows())
    if (auto p = r.event("purchase")) spec.as_of = std::max(spec.as_of, *p);
  const Table enriched = enrich_dataset(orders, orders, spec);

  std::vector<double> delivered, estimated;
  for (const auto& r : enriched.rows()) {
    const auto d = event_duration(r, "approved", "delivered_customer");
    const auto e = event_duration(r, "approved", "estimated_delivery");
    if (!d || !e) continue;
    delivered.push_back(static_cast<double>(*d));
    estimated.push_back(static_cast<double>(*e));
  }
  const auto md = median_of(delivered), me = median_of(estimated);

  std::vector<double> freights;
  for (const auto& r : enriched.rows())
    if (const auto* f = std::get_if<double>(&r.cell("freight_value"))) freights.push_back(*f);
  const double freight_median = five_number_summary(freights).median;
  const double freight_max = *std::max_element(freights.begin(), freights.end());
  const double freight_min = *std::min_element(freights.begin(), freights.end());

  ViewState v = default_view_state(enriched, 0);
  v.reference = "approved";
  const std::vector<double> edges{freight_min, freight_median, freight_max};
  const auto ids = ids_of(enriched);
  const auto groups = group_rows(enriched, ids, "freight_value", edges);
  std::vector<double> low, high;
  for (const auto& g : groups) {
    auto* sink = g.key.rfind('[', 0) == 0 && g.key.back() == ')' ? &low : g.key.back() == ']' ? &high : nullptr;
    if (!sink) continue;
    for (const auto& id : g.ids)
      if (auto x = resolve_event_value(enriched, enriched.at(id), "estimated_delivery", v)) sink->push_back(*x);
  }
  const auto ml = median_of(low), mh = median_of(high);
  const double elapsed = seconds_since(start);
  const bool pass = orders.size() >= 5000 && md && me && *md < *me && ml && mh && *ml < *mh && elapsed < 30.0;
  std::ostringstream os;
  os << source << ", " << orders.size() << " orders; median delivered-approved "
     << (md ? *md / kMsPerDay : NAN) << " d < estimated-approved " << (me ? *me / kMsPerDay : NAN)
     << " d; estimated offset low-freight " << (ml ? *ml : NAN) << " d < high-freight "
     << (mh ? *mh : NAN) << " d; runtime " << elapsed << " s";
  return {pass, os.str()};
}

SimilaritySpec steel_spec(TimestampMs now) {
  SimilaritySpec spec;
  spec.matchers = {{"steel_category", ExactMatch{}},
                   {"coil_width_mm", NumericTolerance{100}},
                   {"", Recency{30, "pickled"}}};
  spec.source_event = "hot_rolled";
  spec.target_event = "pickled";
  spec.as_of = now;
  return spec;
}

std::shared_ptr<Session> steel_session(SessionManager& manager, int rows, std::uint64_t seed, TimestampMs now) {
  SessionSource src;
  src.candidates_csv = export_dataset(generate_steel_dataset({rows, seed, now})).csv;
  src.history_csv = export_dataset(generate_steel_history({rows * 4, seed, now})).csv;
  src.mapping = steel_mapping(false);
  src.spec = similarity_spec_to_json(steel_spec(now));
  src.now_ms = now;
  return manager.create(src);
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("evtab_acceptance_" + name);
  std::filesystem::remove_all(p);
  return p;
}

Outcome steel_workflow() {
  const TimestampMs now = parse_timestamp("2024-03-01");
  SessionManager manager{StateStore(scratch("steel"))};
  auto session = steel_session(manager, 200, 42, now);
  const nlohmann::json filters = {
      {"type", "set_filters"},
      {"filters",
       {{{"column", "warehouse"}, {"predicate", "category_in"}, {"tokens", {"WH-A"}}},
        {{"column", "urgent"}, {"predicate", "equals"}, {"value", false}},
        {{"column", "shipping_due"}, {"predicate", "range"}, {"lo", "2024-03-01"}, {"hi", "2024-04-15"}}}}};
  ViewModel view = session->apply_command(filters);
  const std::size_t filtered = view.rows.size();
  bool filter_ok = filtered > 0;
  for (const auto& r : view.rows) {
    const ItemRow& row = session->candidates().at(r.id);
    const TimestampMs due = std::get<Timestamp>(row.cell("shipping_due")).ms;
    filter_ok = filter_ok && std::get<std::string>(row.cell("warehouse")) == "WH-A" &&
                !std::get<bool>(row.cell("urgent")) && due >= now &&
                due <= parse_timestamp("2024-04-15");
  }
  view = session->apply_command({{"type", "set_sort"}, {"keys", {{{"target", "median"}, {"direction", "descending"}}}}});
  if (view.rows.empty()) return {false, "no rows after filtering"};
  const std::string top = view.rows.front().id;
  bool sorted_ok = true;
  for (std::size_t i = 0; i + 1 < view.rows.size(); ++i) {
    auto a = view.rows[i].boxplot_positions, b = view.rows[i + 1].boxplot_positions;
    if (a.contains("median") && b.contains("median") && a["median"] < b["median"]) sorted_ok = false;
    if (!a.contains("median") && b.contains("median")) sorted_ok = false;
  }
  session->apply_command({{"type", "select_item"}, {"id", top}});
  const ViewModel similar = session->similar_view();
  const ItemRow& selected = session->candidates().at(top);
  int outside = 0;
  if (!selected.similar_box) return {false, "top row " + top + " has no boxplot"};
  for (const auto& r : similar.rows) {
    const auto d = event_duration(session->history().at(r.id), "hot_rolled", "pickled");
    if (!d || *d < selected.similar_box->min || *d > selected.similar_box->max) ++outside;
  }
  const bool pass = filter_ok && sorted_ok && !similar.rows.empty() && outside == 0 &&
                    similar.rows.size() == selected.similar_ids.size();
  return {pass, std::to_string(filtered) + " rows after filters, top " + top + " with " +
                    std::to_string(similar.rows.size()) + " similar items, " + std::to_string(outside) +
                    " outside [min, max]"};
}

ViewState random_view_state(std::mt19937_64& rng, const Table& t, TimestampMs now) {
  const auto& events = t.event_types();
  auto pick_ref = [&] { return rng() % 3 == 0 ? std::string(kCurrentTime) : events[rng() % events.size()]; };
  ViewState v = default_view_state(t, now);
  v.reference = pick_ref();
  v.boxplot_anchor = pick_ref();
  static const TimestampMs units[] = {kMsPerHour, kMsPerDay, 7 * kMsPerDay, 1000};
  v.time_unit_ms = units[rng() % 4];
  v.visible_events.clear();
  for (const auto& e : events)
    if (rng() % 3) v.visible_events.insert(e);
  v.show_boxplot = rng() % 2;
  v.overview = rng() % 2;
  v.overview_stat = std::string(kStatisticKeys[rng() % std::size(kStatisticKeys)]);
  std::uniform_real_distribution<double> u(-50, 50);
  if (rng() % 2) {
    const double lo = u(rng);
    v.zoom_domain = AxisDomain{lo, lo + 0.1 + std::abs(u(rng))};
  }
  static const std::vector<std::string> targets{"steel_category", "coil_width_mm", "urgent", "shipping_due",
                                                "shipping", "hot_rolled", "median", "q3", "min"};
  for (int k = static_cast<int>(rng() % 3); k > 0; --k)
    v.sort.keys.push_back({targets[rng() % targets.size()],
                           rng() % 2 ? SortDirection::ascending : SortDirection::descending});
  switch (rng() % 3) {
    case 0: v.group_by = "warehouse"; break;
    case 1:
      v.group_by = "coil_width_mm";
      v.group_edges = {900, 900 + 10.0 * static_cast<double>(1 + rng() % 40), 1800};
      break;
    default: break;
  }
  if (rng() % 2) v.filters.push_back({"urgent", Equals{rng() % 2 == 0}});
  if (rng() % 2) v.filters.push_back({"steel_category", CategoryIn{{"S235", "DC01"}}});
  if (rng() % 2) v.filters.push_back({"coil_width_mm", Range{900.0 + static_cast<double>(rng() % 300), std::nullopt}});
  if (rng() % 2) v.selected = t.rows()[rng() % t.size()].id;
  v.bin_count = 1 + static_cast<int>(rng() % 48);
  return v;
}

Outcome view_state_round_trip() {
  const TimestampMs now = parse_timestamp("2024-03-01");
  SessionManager manager{StateStore(scratch("roundtrip"))};
  auto session = steel_session(manager, 120, 9, now);
  std::mt19937_64 rng(606);
  int failures = 0;
  const ViewState reset = session->view_state();
  for (int i = 0; i < 100; ++i) {
    const ViewState v = random_view_state(rng, session->candidates(), now);
    const std::string before = serialize(session->replace_view_state(v));
    const std::string name = "state-" + std::to_string(i);
    session->save_state(manager.store(), name, 1000 + i);
    session->replace_view_state(reset);
    const std::string after = serialize(session->load_state(manager.store(), name));
    if (before != after || serialize(session->view()) != before || !(session->view_state() == v)) ++failures;
  }
  return {failures == 0, "100 random states, " + std::to_string(failures) + " non-identical reloads"};
}

Outcome overview_layout() {
  std::mt19937_64 rng(707);
  int failures = 0, cases = 0;
  for (int n : {1, 10, 1000}) {
    const Table t = evtab::testing::random_table(rng, n);
    const auto ids = ids_of(t);
    for (bool overview : {false, true}) {
      for (int sel = 0; sel < 3; ++sel) {
        ViewState v = default_view_state(t, kNow);
        v.overview = overview;
        if (sel == 1) v.selected = ids[rng() % ids.size()];
        // Selected but hidden by a filter: not in the layout's id list.
        std::vector<std::string> laid = ids;
        if (sel == 2 && n > 1) {
          v.selected = ids.front();
          laid.erase(laid.begin());
        }
        const bool selected_listed =
            v.selected && std::find(laid.begin(), laid.end(), *v.selected) != laid.end();
        const std::size_t want_full = overview ? (selected_listed ? 1 : 0) : laid.size();
        const RowLayout layout = layout_rows(laid, v);
        const auto full = static_cast<std::size_t>(std::count_if(
            layout.begin(), layout.end(), [](const auto& e) { return e.height == HeightClass::full; }));
        bool ok = layout.size() == laid.size() && full == want_full;
        for (std::size_t i = 0; ok && i < layout.size(); ++i) ok = layout[i].id == laid[i];
        if (selected_listed && overview)
          for (const auto& e : layout)
            if (e.id == *v.selected && e.height != HeightClass::full) ok = false;
        const ViewModel m = build_view_model(t, v, &laid);
        const auto model_full = static_cast<std::size_t>(std::count_if(
            m.rows.begin(), m.rows.end(), [](const auto& r) { return r.height == HeightClass::full; }));
        ok = ok && m.rows.size() == laid.size() && model_full == want_full;
        ++cases;
        if (!ok) ++failures;
      }
    }
  }
  return {failures == 0, std::to_string(cases) + " layouts, " + std::to_string(failures) + " count violations"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"quantile oracle", quantile_oracle},
      {"alignment shift invariance", shift_invariance},
      {"sort oracle and stability", sort_oracle},
      {"bin conservation", bin_conservation},
      {"similarity oracle and leakage", similarity_oracle},
      {"e-commerce directional reproduction", ecommerce_directional},
      {"steel workflow smoke test", steel_workflow},
      {"view-state round trip", view_state_round_trip},
      {"overview layout", overview_layout},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    if (!o.pass) ++failed;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << "\n";
  return failed == 0 ? 0 : 1;
}
