#include "evtab/session.hpp"

#include <chrono>
#include <fstream>

#include "evtab/event_engine.hpp"

namespace evtab {

nlohmann::json to_json(const SavedState& s) {
  return {{"name", s.name}, {"view", to_json(s.view)}, {"saved_at", s.saved_at}};
}

SavedState saved_state_from_json(const nlohmann::json& j) {
  try {
    return {j.at("name").get<std::string>(), view_state_from_json(j.at("view")),
            j.at("saved_at").get<TimestampMs>()};
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("saved state: ") + e.what());
  }
}

void validate_state_name(std::string_view name) {
  auto ok_char = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
           c == '-' || c == '.';
  };
  if (name.empty() || name.size() > 128 || name.front() == '.' ||
      !std::all_of(name.begin(), name.end(), ok_char))
    throw InputError("invalid state name '" + std::string(name) + "'");
}

std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

StateStore::StateStore(std::filesystem::path root) : root_(std::move(root)) {}

std::filesystem::path StateStore::path_for(std::string_view dataset_hash,
                                           std::string_view name) const {
  validate_state_name(name);
  validate_state_name(dataset_hash);
  return root_ / std::string(dataset_hash) / (std::string(name) + ".json");
}

void StateStore::save(std::string_view dataset_hash, const SavedState& state) const {
  const auto path = path_for(dataset_hash, state.name);
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create state directory '" + path.parent_path().string() + "'");
  const auto tmp = path.string() + ".tmp";
  write_text_file(tmp, to_json(state).dump(2));
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot store state '" + state.name + "': " + ec.message());
}

SavedState StateStore::load(std::string_view dataset_hash, std::string_view name) const {
  const auto path = path_for(dataset_hash, name);
  if (!std::filesystem::exists(path)) throw NotFoundError("unknown state '" + std::string(name) + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("corrupt state file '" + path.string() + "': " + e.what());
  }
  return saved_state_from_json(j);
}

namespace {

std::string table_hash(const Table& candidates, const Table& history) {
  return fnv1a_hex(table_to_json(candidates).dump() + "\n" + table_to_json(history).dump());
}

template <typename T>
T get_field(const nlohmann::json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("command field '") + key + "': " + e.what());
  }
}

std::optional<std::string> optional_event(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return get_field<std::string>(j, key);
}

}  // namespace

ViewState apply_view_command(ViewState view, const nlohmann::json& command, const Table& table) {
  if (!command.is_object()) throw InputError("command must be a JSON object");
  const std::string type = get_field<std::string>(command, "type");

  if (type == "set_filters") {
    view.filters.clear();
    for (const auto& f : command.value("filters", nlohmann::json::array()))
      view.filters.push_back(filter_from_json(f));
  } else if (type == "set_sort") {
    view.sort = sort_from_json(command.value("keys", nlohmann::json::array()));
  } else if (type == "set_group") {
    view.group_by = optional_event(command, "column");
    view.group_edges = command.value("edges", std::vector<double>{});
  } else if (type == "set_reference") {
    view.reference = optional_event(command, "event").value_or(std::string(kCurrentTime));
  } else if (type == "set_unit") {
    view.time_unit_ms = get_field<TimestampMs>(command, "time_unit_ms");
  } else if (type == "toggle_event") {
    const auto event = get_field<std::string>(command, "event");
    if (!table.has_event_type(event)) throw InputError("toggle_event: unknown event '" + event + "'");
    const bool visible = command.contains("visible") ? get_field<bool>(command, "visible")
                                                     : !view.visible_events.contains(event);
    if (visible)
      view.visible_events.insert(event);
    else
      view.visible_events.erase(event);
  } else if (type == "toggle_boxplot") {
    view.show_boxplot =
        command.contains("visible") ? get_field<bool>(command, "visible") : !view.show_boxplot;
  } else if (type == "set_boxplot_anchor") {
    view.boxplot_anchor = optional_event(command, "event").value_or(std::string(kCurrentTime));
  } else if (type == "set_zoom") {
    if (command.contains("domain") && command.at("domain").is_null())
      view = reset_zoom(std::move(view));
    else
      view = zoom(std::move(view), {get_field<double>(command, "lo"), get_field<double>(command, "hi")});
  } else if (type == "reset_zoom") {
    view = reset_zoom(std::move(view));
  } else if (type == "pan") {
    view = pan(std::move(view), get_field<double>(command, "delta"));
  } else if (type == "set_overview") {
    view.overview = get_field<bool>(command, "enabled");
  } else if (type == "set_overview_stat") {
    view.overview_stat = get_field<std::string>(command, "stat");
  } else if (type == "set_bin_count") {
    view.bin_count = get_field<int>(command, "bin_count");
  } else if (type == "select_item") {
    view.selected = get_field<std::string>(command, "id");
  } else if (type == "clear_selection") {
    view.selected.reset();
  } else {
    throw InputError("unknown command '" + type + "'");
  }
  validate_view(view, table);
  return view;
}

Session::Session(std::string id, Table candidates, Table history, ViewState view,
                 ViewState similar_view_state)
    : id_(std::move(id)),
      candidates_(std::move(candidates)),
      history_(std::move(history)),
      dataset_hash_(table_hash(candidates_, history_)),
      view_(std::move(view)),
      similar_view_state_(std::move(similar_view_state)) {
  validate_view(view_, candidates_);
  validate_view(similar_view_state_, history_);
}

ViewState Session::view_state(ViewTarget target) const {
  std::lock_guard lock(mutex_);
  return target == ViewTarget::main ? view_ : similar_view_state_;
}

ViewModel Session::view() const {
  std::lock_guard lock(mutex_);
  return build_view_model(candidates_, view_);
}

ViewModel Session::apply_command(const nlohmann::json& command) {
  std::lock_guard lock(mutex_);
  const bool similar = command.is_object() && command.value("target", std::string("main")) == "similar";
  if (similar) {
    ViewState next = apply_view_command(similar_view_state_, command, history_);
    ViewModel model = similar_view_locked(next);
    similar_view_state_ = std::move(next);
    return model;
  }
  ViewState next = apply_view_command(view_, command, candidates_);
  ViewModel model = build_view_model(candidates_, next);
  view_ = std::move(next);
  return model;
}

ViewModel Session::similar_view_locked(const ViewState& similar_state) const {
  if (!view_.selected) {
    ViewModel empty;
    empty.notice = "no item selected";
    return empty;
  }
  SimilarView sv = evtab::similar_view(candidates_, history_, *view_.selected, view_.now_ms);
  ViewModel model = build_view_model(history_, similar_state, &sv.ids);
  model.warnings.insert(model.warnings.begin(), sv.warnings.begin(), sv.warnings.end());
  return model;
}

ViewModel Session::similar_view() const {
  std::lock_guard lock(mutex_);
  return similar_view_locked(similar_view_state_);
}

ViewModel Session::replace_view_state(ViewState view) {
  std::lock_guard lock(mutex_);
  ViewModel model = build_view_model(candidates_, view);
  view_ = std::move(view);
  return model;
}

SavedState Session::save_state(const StateStore& store, std::string_view name,
                               TimestampMs saved_at) const {
  std::lock_guard lock(mutex_);
  SavedState state{std::string(name), view_, saved_at};
  store.save(dataset_hash_, state);
  return state;
}

ViewModel Session::load_state(const StateStore& store, std::string_view name) {
  std::lock_guard lock(mutex_);
  SavedState state = store.load(dataset_hash_, name);
  ViewModel model = build_view_model(candidates_, state.view);
  view_ = std::move(state.view);
  return model;
}

namespace {

std::string text_or_path(const nlohmann::json& j, const char* inline_key, const char* path_key) {
  if (j.contains(inline_key)) return j.at(inline_key).get<std::string>();
  if (j.contains(path_key)) return read_text_file(j.at(path_key).get<std::string>());
  throw InputError(std::string("missing '") + inline_key + "' or '" + path_key + "'");
}

nlohmann::json object_or_path(const nlohmann::json& j, const char* key, const char* path_key) {
  if (j.contains(key)) return j.at(key);
  try {
    return nlohmann::json::parse(read_text_file(j.at(path_key).get<std::string>()));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string(path_key) + ": " + e.what());
  }
}

}  // namespace

SessionSource session_source_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("session request must be a JSON object");
  try {
    SessionSource s;
    s.candidates_csv = text_or_path(j, "candidates_csv", "candidates_path");
    if (j.contains("history_csv") || j.contains("history_path"))
      s.history_csv = text_or_path(j, "history_csv", "history_path");
    if (!j.contains("mapping") && !j.contains("mapping_path"))
      throw InputError("missing 'mapping' or 'mapping_path'");
    s.mapping = mapping_from_json(object_or_path(j, "mapping", "mapping_path"));
    if (j.contains("spec") || j.contains("spec_path")) s.spec = object_or_path(j, "spec", "spec_path");
    if (j.contains("duration_unit"))
      s.duration_unit = duration_unit_from_string(j.at("duration_unit").get<std::string>());
    if (j.contains("now_ms") && !j.at("now_ms").is_null()) s.now_ms = j.at("now_ms").get<TimestampMs>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("session request: ") + e.what());
  }
}

SessionManager::SessionManager(StateStore store) : store_(std::move(store)) {}

namespace {

TimestampMs wall_clock_seconds() {
  using namespace std::chrono;
  const auto now = floor<seconds>(system_clock::now());
  return duration_cast<milliseconds>(now.time_since_epoch()).count();
}

}  // namespace

std::shared_ptr<Session> SessionManager::create(const SessionSource& source) {
  const TimestampMs now = source.now_ms.value_or(wall_clock_seconds());
  Table candidates = load_dataset(source.candidates_csv, source.mapping, source.duration_unit);
  Table history = source.history_csv
                      ? load_dataset(*source.history_csv, source.mapping, source.duration_unit)
                      : build_table(candidates.descriptors(), candidates.event_types(), {});
  std::optional<SimilaritySpec> spec;
  if (source.spec) spec = similarity_spec_from_json(*source.spec, now);
  const bool unmapped = !source.mapping.similar_data_duration && !source.mapping.similar_data_ids;
  if (spec && unmapped) candidates = enrich_dataset(candidates, history, *spec);
  return create(std::move(candidates), std::move(history), spec, now);
}

std::shared_ptr<Session> SessionManager::create(Table candidates, Table history,
                                                const std::optional<SimilaritySpec>& spec,
                                                TimestampMs now_ms) {
  ViewState view = default_view_state(candidates, now_ms);
  if (spec && candidates.has_event_type(spec->source_event)) view.boxplot_anchor = spec->source_event;
  ViewState similar = default_view_state(history, now_ms);
  std::lock_guard lock(mutex_);
  std::string id = "s" + std::to_string(next_id_++);
  auto session = std::make_shared<Session>(id, std::move(candidates), std::move(history),
                                           std::move(view), std::move(similar));
  sessions_.emplace(id, session);
  return session;
}

std::shared_ptr<Session> SessionManager::get(std::string_view id) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(std::string(id));
  if (it == sessions_.end()) throw NotFoundError("unknown session '" + std::string(id) + "'");
  return it->second;
}

}  // namespace evtab
