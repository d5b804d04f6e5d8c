// evtab command-line entry point: dataset generation, preprocessing,
// headless export and the HTTP service.

#include <chrono>
#include <csignal>
#include <iostream>

#include "CLI11.hpp"

#include "evtab/ecommerce.hpp"
#include "evtab/http_server.hpp"
#include "evtab/ingestion.hpp"
#include "evtab/session.hpp"
#include "evtab/similarity.hpp"
#include "evtab/view_model.hpp"

namespace {

using namespace evtab;

TimestampMs parse_now(const std::string& text) {
  if (text.empty()) {
    using namespace std::chrono;
    return duration_cast<milliseconds>(floor<seconds>(system_clock::now()).time_since_epoch()).count();
  }
  if (auto v = parse_decimal(text); v && text.find_first_of(".eE") == std::string::npos)
    return static_cast<TimestampMs>(*v);
  return parse_timestamp(text);
}

nlohmann::json read_json(const std::string& path) {
  try {
    return nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-")
    std::cout << text;
  else
    write_text_file(path, text);
}

struct SourceOptions {
  std::string candidates, history, mapping, spec, duration_unit = "days", now;

  void add_to(CLI::App* app, bool require_spec) {
    app->add_option("--candidates", candidates, "Candidate items CSV")->required();
    app->add_option("--history", history, "Historical items CSV");
    app->add_option("--mapping", mapping, "Field mapping JSON")->required();
    auto* spec_opt = app->add_option("--spec", spec, "Similarity spec JSON");
    if (require_spec) spec_opt->required();
    app->add_option("--duration-unit", duration_unit, "Unit of the similar-durations field")
        ->check(CLI::IsMember({"days", "hours", "ms"}));
    app->add_option("--now", now, "Frozen current time (epoch ms or YYYY-MM-DD[ HH:MM:SS])");
  }

  SessionSource load() const {
    SessionSource s;
    s.candidates_csv = read_text_file(candidates);
    if (!history.empty()) s.history_csv = read_text_file(history);
    s.mapping = mapping_from_json(read_json(mapping));
    if (!spec.empty()) s.spec = read_json(spec);
    s.duration_unit = duration_unit_from_string(duration_unit);
    s.now_ms = parse_now(now);
    return s;
  }
};

evtab::HttpServer* g_server = nullptr;

void handle_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"evtab: event-sequence table engine"};
  app.require_subcommand(1);

  // generate-steel
  auto* gen = app.add_subcommand("generate-steel", "Write a synthetic steel-logistics dataset");
  int rows = 200, history_rows = 0;
  std::uint64_t seed = 1;
  std::string gen_out, gen_history_out, gen_mapping_out, gen_spec_out, gen_now;
  gen->add_option("--rows", rows, "Number of candidate coils")->required();
  gen->add_option("--seed", seed, "Generator seed")->required();
  gen->add_option("--out", gen_out, "Candidate CSV output")->required();
  gen->add_option("--history-out", gen_history_out, "Historical coils CSV output");
  gen->add_option("--history-rows", history_rows, "Historical coils (default 4x rows)");
  gen->add_option("--mapping-out", gen_mapping_out, "Write the matching field mapping JSON");
  gen->add_option("--spec-out", gen_spec_out, "Write a default similarity spec JSON");
  gen->add_option("--now", gen_now, "Reference time (default: now)");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Load a CSV through a mapping and print the table");
  std::string ingest_input, ingest_mapping, ingest_unit = "days", ingest_out;
  ingest->add_option("--input", ingest_input, "Dataset CSV")->required();
  ingest->add_option("--mapping", ingest_mapping, "Field mapping JSON")->required();
  ingest->add_option("--duration-unit", ingest_unit)->check(CLI::IsMember({"days", "hours", "ms"}));
  ingest->add_option("--out", ingest_out, "Table JSON output (default stdout)");

  // preprocess
  auto* pre = app.add_subcommand("preprocess", "Derive similar items and write an enriched CSV");
  SourceOptions pre_src;
  std::string pre_out, pre_mapping_out;
  pre_src.add_to(pre, true);
  pre->add_option("--out", pre_out, "Enriched candidates CSV")->required();
  pre->add_option("--mapping-out", pre_mapping_out, "Mapping for the enriched CSV");

  // export
  auto* exp = app.add_subcommand("export", "Emit the resolved view headlessly");
  SourceOptions exp_src;
  std::string exp_format = "json", exp_state, exp_out;
  bool exp_similar = false;
  std::vector<std::string> exp_commands;
  exp_src.add_to(exp, false);
  exp->add_option("--format", exp_format)->check(CLI::IsMember({"csv", "json"}));
  exp->add_option("--state", exp_state, "View state JSON to apply");
  exp->add_option("--command", exp_commands, "Command JSON applied in order (repeatable)");
  exp->add_flag("--similar", exp_similar, "Export the similar-items view of the selection");
  exp->add_option("--out", exp_out, "Output file (default stdout)");

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  SourceOptions serve_src;
  std::string host = "127.0.0.1", state_dir = "evtab-state", static_dir;
  int port = 8080;
  serve->add_option("--candidates", serve_src.candidates, "Candidate items CSV");
  serve->add_option("--history", serve_src.history, "Historical items CSV");
  serve->add_option("--mapping", serve_src.mapping, "Field mapping JSON");
  serve->add_option("--spec", serve_src.spec, "Similarity spec JSON");
  serve->add_option("--duration-unit", serve_src.duration_unit)
      ->check(CLI::IsMember({"days", "hours", "ms"}));
  serve->add_option("--now", serve_src.now, "Frozen current time");
  serve->add_option("--port", port, "Listen port");
  serve->add_option("--host", host, "Listen address");
  serve->add_option("--state-dir", state_dir, "Saved view-state directory");
  serve->add_option("--static-dir", static_dir, "UI bundle directory");

  // olist
  auto* olist = app.add_subcommand("olist", "Convert e-commerce (Olist) files to an evtab CSV");
  std::string olist_dir, olist_out, olist_mapping_out, olist_generate_dir, olist_now;
  int olist_orders = 0;
  olist->add_option("--dir", olist_dir, "Directory with the public Olist CSV files");
  olist->add_option("--generate", olist_orders, "Generate N synthetic orders instead of reading --dir");
  olist->add_option("--seed", seed, "Seed for --generate");
  olist->add_option("--now", olist_now, "Reference time for --generate");
  olist->add_option("--raw-out", olist_generate_dir, "Also write the raw three-file layout here");
  olist->add_option("--out", olist_out, "Converted CSV")->required();
  olist->add_option("--mapping-out", olist_mapping_out, "Mapping for the converted CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      const TimestampMs now = parse_now(gen_now);
      const Table candidates = generate_steel_dataset({rows, seed, now});
      write_text_file(gen_out, export_dataset(candidates).csv);
      if (!gen_history_out.empty()) {
        const int n = history_rows > 0 ? history_rows : 4 * rows;
        write_text_file(gen_history_out, export_dataset(generate_steel_history({n, seed, now})).csv);
      }
      if (!gen_mapping_out.empty())
        write_text_file(gen_mapping_out, mapping_to_json(steel_mapping(false)).dump(2) + "\n");
      if (!gen_spec_out.empty()) {
        SimilaritySpec spec;
        spec.matchers = {{"steel_category", ExactMatch{}},
                         {"coil_width_mm", NumericTolerance{100}},
                         {"", Recency{30, "pickled"}}};
        spec.source_event = "hot_rolled";
        spec.target_event = "pickled";
        spec.as_of = now;
        write_text_file(gen_spec_out, similarity_spec_to_json(spec).dump(2) + "\n");
      }
    } else if (ingest->parsed()) {
      const Table table = load_dataset_file(ingest_input, mapping_from_json(read_json(ingest_mapping)),
                                            duration_unit_from_string(ingest_unit));
      write_output(ingest_out, table_to_json(table).dump(2) + "\n");
    } else if (pre->parsed()) {
      const SessionSource s = pre_src.load();
      const Table candidates = load_dataset(s.candidates_csv, s.mapping, s.duration_unit);
      const Table history = s.history_csv ? load_dataset(*s.history_csv, s.mapping, s.duration_unit)
                                          : build_table(candidates.descriptors(),
                                                        candidates.event_types(), {});
      const SimilaritySpec spec = similarity_spec_from_json(*s.spec, *s.now_ms);
      const ExportedDataset out = export_dataset(enrich_dataset(candidates, history, spec));
      write_text_file(pre_out, out.csv);
      if (!pre_mapping_out.empty())
        write_text_file(pre_mapping_out, mapping_to_json(out.mapping).dump(2) + "\n");
    } else if (exp->parsed()) {
      SessionManager manager{StateStore{std::filesystem::temp_directory_path() / "evtab-export"}};
      auto session = manager.create(exp_src.load());
      ViewModel model = session->view();
      if (!exp_state.empty()) model = session->replace_view_state(view_state_from_json(read_json(exp_state)));
      for (const auto& c : exp_commands) model = session->apply_command(nlohmann::json::parse(c));
      if (exp_similar) model = session->similar_view();
      const Table& table = exp_similar ? session->history() : session->candidates();
      write_output(exp_out, exp_format == "csv" ? view_model_to_csv(model, table)
                                                : to_json(model).dump(2) + "\n");
    } else if (serve->parsed()) {
      auto manager = std::make_shared<SessionManager>(StateStore{state_dir});
      if (!serve_src.candidates.empty()) {
        if (serve_src.mapping.empty()) throw InputError("--mapping is required with --candidates");
        auto session = manager->create(serve_src.load());
        std::cout << "session " << session->id() << ": " << session->candidates().size()
                  << " candidates, " << session->history().size() << " history rows\n";
      }
      HttpServer server(manager, static_dir.empty() ? std::nullopt
                                                    : std::optional<std::filesystem::path>(static_dir));
      const int bound = server.bind(host, port);
      std::cout << "listening on http://" << host << ":" << bound << std::endl;
      g_server = &server;
      std::signal(SIGINT, handle_signal);
      std::signal(SIGTERM, handle_signal);
      server.listen();
      g_server = nullptr;
    } else if (olist->parsed()) {
      OlistFiles files;
      if (olist_orders > 0)
        files = generate_olist_sample(olist_orders, seed, parse_now(olist_now));
      else if (!olist_dir.empty())
        files = read_olist_directory(olist_dir);
      else
        throw InputError("olist: pass --dir or --generate");
      if (!olist_generate_dir.empty()) {
        std::filesystem::create_directories(olist_generate_dir);
        write_text_file(std::filesystem::path(olist_generate_dir) / kOlistOrdersFile, files.orders_csv);
        write_text_file(std::filesystem::path(olist_generate_dir) / kOlistCustomersFile,
                        files.customers_csv);
        write_text_file(std::filesystem::path(olist_generate_dir) / kOlistItemsFile,
                        files.order_items_csv);
      }
      const ExportedDataset out = export_dataset(load_olist(files));
      write_text_file(olist_out, out.csv);
      if (!olist_mapping_out.empty())
        write_text_file(olist_mapping_out, mapping_to_json(out.mapping).dump(2) + "\n");
    }
  } catch (const std::exception& e) {
    std::cerr << "evtab: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
