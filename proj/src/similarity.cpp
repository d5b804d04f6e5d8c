#include "evtab/similarity.hpp"

#include <algorithm>
#include <cmath>

#include "evtab/ingestion.hpp"

namespace evtab {

BoxplotSummary five_number_summary(std::span<const double> durations_ms) {
  if (durations_ms.empty()) throw InputError("five_number_summary: empty duration list");
  std::vector<double> sorted(durations_ms.begin(), durations_ms.end());
  for (double d : sorted)
    if (!std::isfinite(d)) throw InputError("five_number_summary: non-finite duration");
  std::sort(sorted.begin(), sorted.end());

  auto quantile = [&](double p) {
    const double h = static_cast<double>(sorted.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted[lo];
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
  };

  BoxplotSummary s;
  s.min = sorted.front();
  s.q1 = quantile(0.25);
  s.median = quantile(0.5);
  s.q3 = quantile(0.75);
  s.max = sorted.back();
  s.durations.assign(durations_ms.begin(), durations_ms.end());
  return s;
}

std::optional<TimestampMs> event_duration(const ItemRow& row, std::string_view source_event,
                                          std::string_view target_event) {
  const auto source = row.event(source_event);
  const auto target = row.event(target_event);
  if (!source || !target) return std::nullopt;
  return *target - *source;
}

bool SimilarSet::has_negative_duration() const {
  return std::any_of(durations_ms.begin(), durations_ms.end(), [](double d) { return d < 0; });
}

namespace {

TimestampMs timestamp_from_json(const nlohmann::json& j) {
  if (j.is_number_integer()) return j.get<TimestampMs>();
  if (j.is_string()) return parse_timestamp(j.get<std::string>());
  throw InputError("as_of must be epoch milliseconds or a timestamp string");
}

}  // namespace

SimilaritySpec similarity_spec_from_json(const nlohmann::json& j, TimestampMs default_as_of) {
  if (!j.is_object()) throw InputError("similarity spec must be a JSON object");
  SimilaritySpec spec;
  try {
    spec.source_event = j.at("source_event").get<std::string>();
    spec.target_event = j.at("target_event").get<std::string>();
    spec.as_of = j.contains("as_of") && !j.at("as_of").is_null() ? timestamp_from_json(j.at("as_of"))
                                                                 : default_as_of;
    for (const auto& m : j.value("matchers", nlohmann::json::array())) {
      Matcher matcher;
      const std::string rule = m.at("rule").get<std::string>();
      if (rule == "exact") {
        matcher.column = m.at("column").get<std::string>();
        matcher.rule = ExactMatch{};
      } else if (rule == "numeric_tolerance") {
        matcher.column = m.at("column").get<std::string>();
        matcher.rule = NumericTolerance{m.at("epsilon").get<double>()};
      } else if (rule == "recency") {
        matcher.rule = Recency{m.at("k").get<int>(), m.at("by").get<std::string>()};
      } else {
        throw InputError("unknown matcher rule '" + rule + "'");
      }
      spec.matchers.push_back(std::move(matcher));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("similarity spec: ") + e.what());
  }
  return spec;
}

nlohmann::json similarity_spec_to_json(const SimilaritySpec& spec) {
  nlohmann::json matchers = nlohmann::json::array();
  for (const auto& m : spec.matchers) {
    nlohmann::json jm;
    if (std::holds_alternative<ExactMatch>(m.rule)) {
      jm = {{"column", m.column}, {"rule", "exact"}};
    } else if (const auto* t = std::get_if<NumericTolerance>(&m.rule)) {
      jm = {{"column", m.column}, {"rule", "numeric_tolerance"}, {"epsilon", t->epsilon}};
    } else {
      const auto& r = std::get<Recency>(m.rule);
      jm = {{"rule", "recency"}, {"k", r.k}, {"by", r.by}};
    }
    matchers.push_back(std::move(jm));
  }
  return {{"matchers", std::move(matchers)},
          {"source_event", spec.source_event},
          {"target_event", spec.target_event},
          {"as_of", spec.as_of}};
}

void validate_spec(const SimilaritySpec& spec, const Table& history) {
  if (spec.source_event == spec.target_event)
    throw InputError("similarity spec: source_event and target_event must differ");
  for (const auto* key : {&spec.source_event, &spec.target_event})
    if (!history.has_event_type(*key))
      throw InputError("similarity spec: undeclared event '" + *key + "'");
  int recency_count = 0;
  for (const auto& m : spec.matchers) {
    if (const auto* r = std::get_if<Recency>(&m.rule)) {
      if (++recency_count > 1) throw InputError("similarity spec: at most one recency matcher");
      if (r->k <= 0) throw InputError("similarity spec: recency k must be positive");
      if (!history.has_event_type(r->by))
        throw InputError("similarity spec: recency references undeclared event '" + r->by + "'");
      continue;
    }
    const ColumnDescriptor* d = history.descriptor(m.column);
    if (!d) throw InputError("similarity spec: unknown column '" + m.column + "'");
    if (const auto* t = std::get_if<NumericTolerance>(&m.rule)) {
      if (d->kind != ColumnType::number)
        throw InputError("similarity spec: numeric_tolerance requires a number column ('" +
                         m.column + "')");
      if (!(t->epsilon >= 0) || !std::isfinite(t->epsilon))
        throw InputError("similarity spec: epsilon must be finite and non-negative");
    } else if (d->kind != ColumnType::categorical && d->kind != ColumnType::boolean) {
      throw InputError("similarity spec: exact match requires a categorical or boolean column ('" +
                       m.column + "')");
    }
  }
}

namespace {

bool passes(const Matcher& m, const ItemRow& query, const ItemRow& candidate) {
  const CellValue& q = query.cell(m.column);
  const CellValue& c = candidate.cell(m.column);
  if (is_missing(q) || is_missing(c)) return false;
  if (const auto* t = std::get_if<NumericTolerance>(&m.rule)) {
    const double* qv = std::get_if<double>(&q);
    const double* cv = std::get_if<double>(&c);
    return qv && cv && std::abs(*cv - *qv) <= t->epsilon;
  }
  return q == c;
}

}  // namespace

SimilarSet derive_similar_items(const ItemRow& query, const Table& history,
                                const SimilaritySpec& spec) {
  validate_spec(spec, history);
  const Recency* recency = nullptr;
  for (const auto& m : spec.matchers)
    if (const auto* r = std::get_if<Recency>(&m.rule)) recency = r;

  std::vector<const ItemRow*> candidates;
  for (const ItemRow& row : history.rows()) {
    if (row.id == query.id) continue;
    const auto source = row.event(spec.source_event);
    const auto target = row.event(spec.target_event);
    if (!source || !target || *target > spec.as_of) continue;
    bool ok = true;
    for (const auto& m : spec.matchers) {
      if (std::holds_alternative<Recency>(m.rule)) continue;
      if (!passes(m, query, row)) {
        ok = false;
        break;
      }
    }
    if (ok) candidates.push_back(&row);
  }

  if (recency) {
    std::erase_if(candidates, [&](const ItemRow* r) { return !r->event(recency->by); });
    std::sort(candidates.begin(), candidates.end(), [&](const ItemRow* a, const ItemRow* b) {
      const TimestampMs ta = *a->event(recency->by);
      const TimestampMs tb = *b->event(recency->by);
      if (ta != tb) return ta > tb;
      return a->id < b->id;
    });
    if (candidates.size() > static_cast<std::size_t>(recency->k))
      candidates.resize(static_cast<std::size_t>(recency->k));
  }

  SimilarSet out;
  for (const ItemRow* row : candidates) {
    out.ids.push_back(row->id);
    out.durations_ms.push_back(
        static_cast<double>(*event_duration(*row, spec.source_event, spec.target_event)));
  }
  if (!out.durations_ms.empty()) out.summary = five_number_summary(out.durations_ms);
  return out;
}

Table enrich_dataset(const Table& candidates, const Table& history, const SimilaritySpec& spec) {
  validate_spec(spec, history);
  std::vector<ItemRow> rows = candidates.rows();
  for (ItemRow& row : rows) {
    SimilarSet set = derive_similar_items(row, history, spec);
    std::erase(row.warnings, std::string(kNegativeDurationWarning));
    if (set.has_negative_duration()) row.warnings.emplace_back(kNegativeDurationWarning);
    row.similar_ids = std::move(set.ids);
    row.similar_box = std::move(set.summary);
  }
  return build_table(candidates.descriptors(), candidates.event_types(), std::move(rows));
}

}  // namespace evtab
