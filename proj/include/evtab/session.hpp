#pragma once

// Sessions host a candidate table, a history table and two independent view
// states (main table and linked similar-items table). Commands on one
// session are applied one at a time; a failing command leaves the state
// untouched.

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include "json.hpp"

#include "evtab/core_model.hpp"
#include "evtab/ingestion.hpp"
#include "evtab/similarity.hpp"
#include "evtab/view_model.hpp"
#include "evtab/view_state.hpp"

namespace evtab {

struct SavedState {
  std::string name;
  ViewState view;
  TimestampMs saved_at = 0;

  friend bool operator==(const SavedState&, const SavedState&) = default;
};

nlohmann::json to_json(const SavedState& s);
SavedState saved_state_from_json(const nlohmann::json& j);

/// Directory of named JSON documents, one subdirectory per dataset hash.
class StateStore {
 public:
  explicit StateStore(std::filesystem::path root);

  void save(std::string_view dataset_hash, const SavedState& state) const;
  /// Throws NotFoundError for an unknown name.
  SavedState load(std::string_view dataset_hash, std::string_view name) const;

  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path path_for(std::string_view dataset_hash, std::string_view name) const;
  std::filesystem::path root_;
};

/// Throws InputError unless `name` is 1-128 characters of [A-Za-z0-9_.-]
/// not starting with '.'.
void validate_state_name(std::string_view name);

/// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(std::string_view data);

enum class ViewTarget { main, similar };

class Session {
 public:
  Session(std::string id, Table candidates, Table history, ViewState view,
          ViewState similar_view_state);

  const std::string& id() const { return id_; }
  const Table& candidates() const { return candidates_; }
  const Table& history() const { return history_; }
  const std::string& dataset_hash() const { return dataset_hash_; }

  ViewState view_state(ViewTarget target = ViewTarget::main) const;
  ViewModel view() const;

  /// Applies one command and returns the recomputed view of its target.
  /// Throws InputError (state unchanged) on an invalid command.
  ViewModel apply_command(const nlohmann::json& command);

  /// Similar-items view for the current selection; empty with a notice when
  /// nothing is selected.
  ViewModel similar_view() const;

  /// Installs a complete main view state after validating it.
  ViewModel replace_view_state(ViewState view);

  SavedState save_state(const StateStore& store, std::string_view name, TimestampMs saved_at) const;
  ViewModel load_state(const StateStore& store, std::string_view name);

 private:
  ViewModel similar_view_locked(const ViewState& similar_state) const;

  std::string id_;
  Table candidates_;
  Table history_;
  std::string dataset_hash_;
  mutable std::mutex mutex_;
  ViewState view_;
  ViewState similar_view_state_;
};

/// Pure command application, exposed for testing: returns the mutated copy.
ViewState apply_view_command(ViewState view, const nlohmann::json& command, const Table& table);

struct SessionSource {
  std::string candidates_csv;
  std::optional<std::string> history_csv;
  FieldMapping mapping;
  std::optional<nlohmann::json> spec;
  DurationUnit duration_unit = DurationUnit::days;
  std::optional<TimestampMs> now_ms;
};

/// Parses a POST /sessions body: candidates_csv or candidates_path,
/// optional history_csv or history_path, mapping (object or mapping_path),
/// optional spec (object or spec_path), duration_unit, now_ms.
SessionSource session_source_from_json(const nlohmann::json& j);

class SessionManager {
 public:
  explicit SessionManager(StateStore store);

  /// Loads both tables, enriches candidates through the similarity spec when
  /// the mapping has no similar fields, and installs default view states.
  std::shared_ptr<Session> create(const SessionSource& source);
  std::shared_ptr<Session> create(Table candidates, Table history,
                                  const std::optional<SimilaritySpec>& spec, TimestampMs now_ms);
  /// Throws NotFoundError for an unknown id.
  std::shared_ptr<Session> get(std::string_view id) const;

  const StateStore& store() const { return store_; }

 private:
  mutable std::mutex mutex_;
  std::unordered_map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_id_ = 1;
  StateStore store_;
};

}  // namespace evtab
