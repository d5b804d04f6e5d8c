#pragma once

// Similar-item derivation: attribute matchers select historical items for a
// candidate, the realized duration between one source and one target event
// is taken per match, and the resulting distribution is summarized.

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "evtab/core_model.hpp"

namespace evtab {

/// Five-number summary with type-7 quantiles: linear interpolation between
/// closest ranks at (n - 1) * p over the sorted values. Throws InputError for
/// an empty or non-finite input. `durations` keeps the input order.
BoxplotSummary five_number_summary(std::span<const double> durations_ms);

/// ts(target) - ts(source), possibly negative; nullopt when either is absent.
std::optional<TimestampMs> event_duration(const ItemRow& row, std::string_view source_event,
                                          std::string_view target_event);

struct ExactMatch {
  friend bool operator==(ExactMatch, ExactMatch) = default;
};
struct NumericTolerance {
  double epsilon = 0;
  friend bool operator==(NumericTolerance, NumericTolerance) = default;
};
struct Recency {
  int k = 1;
  std::string by;
  friend bool operator==(const Recency&, const Recency&) = default;
};

struct Matcher {
  /// Attribute column; unused for recency.
  std::string column;
  std::variant<ExactMatch, NumericTolerance, Recency> rule;

  friend bool operator==(const Matcher&, const Matcher&) = default;
};

struct SimilaritySpec {
  std::vector<Matcher> matchers;
  std::string source_event;
  std::string target_event;
  /// Leakage cutoff: only history items whose target event happened at or
  /// before this instant are eligible.
  TimestampMs as_of = 0;

  friend bool operator==(const SimilaritySpec&, const SimilaritySpec&) = default;
};

/// `as_of` may be given as epoch milliseconds or a timestamp string; when
/// absent, `default_as_of` is used.
SimilaritySpec similarity_spec_from_json(const nlohmann::json& j, TimestampMs default_as_of);
nlohmann::json similarity_spec_to_json(const SimilaritySpec& spec);

/// Throws InputError unless the spec is valid against `history`.
void validate_spec(const SimilaritySpec& spec, const Table& history);

struct SimilarSet {
  std::vector<std::string> ids;
  std::vector<double> durations_ms;
  std::optional<BoxplotSummary> summary;

  bool empty() const { return ids.empty(); }
  bool has_negative_duration() const;
};

/// Eligible history rows (other id, both events present, target at or before
/// as_of) that pass every exact/tolerance matcher; a recency matcher then
/// keeps the k with the latest `by` event (ties by ascending id). Query cells
/// that are missing match nothing. Ids come out in history order, or by
/// recency rank when a recency matcher is present.
SimilarSet derive_similar_items(const ItemRow& query, const Table& history,
                                const SimilaritySpec& spec);

/// Candidates with similar_ids/similar_box filled per row. Rows whose set
/// contains a negative duration get a data-quality warning.
Table enrich_dataset(const Table& candidates, const Table& history, const SimilaritySpec& spec);

inline constexpr std::string_view kNegativeDurationWarning =
    "negative duration in similar-item distribution";

}  // namespace evtab
