#include <csignal>
#include <iomanip>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cbmr/api.hpp"
#include "cbmr/engine.hpp"
#include "cbmr/error.hpp"
#include "cbmr/eval.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
  std::string config_path;
  std::string data_dir;

  std::vector<std::string> ingest_paths;
  bool no_index = false;

  std::vector<std::string> terms;
  std::vector<std::string> audio_categories;
  std::vector<std::string> term_categories;
  std::vector<double> term_weights;
  std::vector<std::string> media_filter;
  std::size_t k = 0;
  bool json_out = false;

  std::string scenarios;
  std::string server;
  std::string report_json;

  std::string host;
  int port = -1;
};

cbmr::EngineConfig load_config(const Options& o) {
  cbmr::EngineConfig config = o.config_path.empty() ? cbmr::EngineConfig{} : cbmr::EngineConfig::load(o.config_path);
  if (!o.data_dir.empty()) config.data_dir = o.data_dir;
  return config;
}

// Plain files and the direct children of directories with a known extension.
std::vector<fs::path> expand_paths(const std::vector<std::string>& inputs) {
  std::vector<fs::path> out;
  for (const auto& in : inputs) {
    if (!fs::is_directory(in)) {
      out.emplace_back(in);
      continue;
    }
    std::vector<fs::path> children;
    for (const auto& entry : fs::directory_iterator(in))
      if (entry.is_regular_file() && cbmr::media_type_for_path(entry.path())) children.push_back(entry.path());
    std::sort(children.begin(), children.end());
    out.insert(out.end(), children.begin(), children.end());
  }
  return out;
}

void print_index_report(const cbmr::IndexReport& r) {
  std::cout << "index built in " << std::fixed << std::setprecision(2) << r.seconds << " s";
  if (r.codebook_k > 0) std::cout << ", codebook k=" << r.codebook_k;
  std::cout << "\n";
  for (const auto& [cat, rows] : r.rows) {
    std::cout << "  " << std::left << std::setw(22) << cat << std::right << std::setw(8) << rows << " rows";
    if (const auto it = r.d_max.find(cat); it != r.d_max.end())
      std::cout << "  d_max=" << std::setprecision(6) << std::defaultfloat << it->second << std::fixed;
    std::cout << "\n";
  }
}

int run_ingest(const Options& o) {
  cbmr::Engine engine(load_config(o));
  const auto report = engine.ingest(expand_paths(o.ingest_paths));
  for (const auto& obj : report.objects) {
    std::cout << obj.path << "  " << obj.object_id << "  " << cbmr::to_string(obj.media_type) << "  segments="
              << obj.segments;
    if (obj.duplicate)
      std::cout << "  (already ingested)";
    else
      std::cout << "  vectors=" << obj.vectors << "  hashes=" << obj.hashes;
    std::cout << "\n";
  }
  std::cout << report.objects.size() << " objects ingested\n";
  if (!o.no_index) print_index_report(engine.build_index());
  if (!report.failures.empty()) {
    std::cerr << report.failures.size() << " files failed:\n";
    for (const auto& f : report.failures) std::cerr << "  " << f.path << ": " << f.error << "\n";
    return 1;
  }
  return 0;
}

int run_index(const Options& o) {
  cbmr::Engine engine(load_config(o));
  print_index_report(engine.build_index());
  return 0;
}

// Rebuilds components from the order options appeared on the command line.
json build_query(const CLI::App& cmd, const Options& o, std::size_t default_k) {
  json components = json::array({json{{"terms", json::array()}}});
  std::size_t term_i = 0, audio_i = 0, cat_i = 0, weight_i = 0;
  json* last = nullptr;
  for (const CLI::Option* opt : cmd.parse_order()) {
    const std::string name = opt->get_name();
    if (name == "--component") {
      if (!components.back()["terms"].empty()) components.push_back(json{{"terms", json::array()}});
      last = nullptr;
    } else if (name == "--term") {
      const std::string& spec = o.terms.at(term_i++);
      const auto eq = spec.find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size())
        throw CLI::ValidationError("--term", "expected <type>=<file>, got '" + spec + "'");
      std::string type = spec.substr(0, eq);
      std::transform(type.begin(), type.end(), type.begin(), [](unsigned char c) { return std::tolower(c); });
      json term{{"path", fs::absolute(spec.substr(eq + 1)).string()}};
      if (type == "image" || type == "sketch") term["type"] = "IMAGE";
      else if (type == "audio") term["type"] = "AUDIO";
      else if (type == "3d" || type == "model3d" || type == "model_3d" || type == "mesh") term["type"] = "MODEL_3D";
      else throw CLI::ValidationError("--term", "unknown term type '" + type + "'");
      components.back()["terms"].push_back(std::move(term));
      last = &components.back()["terms"].back();
    } else if (name == "--audio-category") {
      const std::string& value = o.audio_categories.at(audio_i++);
      if (!last || (*last)["type"] != "AUDIO")
        throw CLI::ValidationError("--audio-category", "must follow an audio term");
      (*last)["audio_category"] = value;
    } else if (name == "--category") {
      const std::string& spec = o.term_categories.at(cat_i++);
      if (!last) throw CLI::ValidationError("--category", "must follow a term");
      const auto eq = spec.find('=');
      (*last)["categories"][spec.substr(0, eq)] = eq == std::string::npos ? 1.0 : std::stod(spec.substr(eq + 1));
    } else if (name == "--weight") {
      if (!last) throw CLI::ValidationError("--weight", "must follow a term");
      (*last)["weight"] = o.term_weights.at(weight_i++);
    }
  }
  if (components.back()["terms"].empty()) components.erase(components.size() - 1);
  json query{{"components", components}, {"k", o.k > 0 ? o.k : default_k}};
  if (!o.media_filter.empty()) query["media_filter"] = o.media_filter;
  return query;
}

int run_query(const CLI::App& cmd, const Options& o) {
  if (o.terms.empty()) {
    std::cerr << "query: at least one --term <type>=<file> is required\n" << cmd.help();
    return 2;
  }
  cbmr::Engine engine(load_config(o));
  json doc;
  try {
    doc = build_query(cmd, o, engine.config().default_k);
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  const cbmr::Query query =
      cbmr::api::query_from_json(cbmr::eval::inline_references(doc), engine.config().max_upload_bytes, engine.config().default_k);
  const auto response = engine.execute_query(query);
  if (o.json_out) {
    std::cout << cbmr::api::canonical(cbmr::api::response_to_json(response)) << "\n";
    return 0;
  }
  std::cout << std::left << std::setw(6) << "rank" << std::setw(10) << "score" << std::setw(44) << "segment" << "name\n";
  for (std::size_t i = 0; i < response.results.size(); ++i) {
    const auto& r = response.results[i];
    std::string name;
    try {
      name = engine.object(r.object_id).object.name;
    } catch (const cbmr::Error&) {
    }
    std::cout << std::left << std::setw(6) << i + 1 << std::setw(10) << std::fixed << std::setprecision(4) << r.score
              << std::setw(44) << r.segment_id << name << "\n";
  }
  std::cout << "session " << response.session_id << "\n";
  return 0;
}

int run_eval(const Options& o) {
  const auto config = load_config(o);
  const auto scenarios = cbmr::eval::load_scenarios(o.scenarios);
  const cbmr::eval::NdcgOptions ndcg{config.ndcg_gain, config.ndcg_log_base};
  std::vector<cbmr::eval::ScenarioResult> results;
  if (!o.server.empty()) {
    const auto colon = o.server.rfind(':');
    if (colon == std::string::npos) throw cbmr::Error(cbmr::ErrorCode::InvalidConfig, "--server expects host:port");
    cbmr::eval::RemoteBackend backend(o.server.substr(0, colon), std::stoi(o.server.substr(colon + 1)), config.token,
                                      config.timeout_seconds);
    results = cbmr::eval::run_scenarios(scenarios, backend, ndcg);
  } else {
    cbmr::Engine engine(config);
    cbmr::eval::LocalBackend backend(engine);
    results = cbmr::eval::run_scenarios(scenarios, backend, ndcg);
  }
  std::cout << cbmr::eval::format_report(results);
  if (!o.report_json.empty()) {
    const std::string text = cbmr::eval::report_to_json(results).dump(2) + "\n";
    cbmr::write_file(o.report_json, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  }
  return 0;
}

int run_serve(const Options& o) {
  auto config = load_config(o);
  if (!o.host.empty()) config.host = o.host;
  if (o.port >= 0) config.port = o.port;

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  cbmr::Engine engine(config);
  cbmr::api::Server server(engine, config.host, static_cast<std::uint16_t>(config.port));
  const auto port = server.start();
  std::cout << "listening on " << config.host << ":" << port << std::endl;
  int sig = 0;
  sigwait(&signals, &sig);
  server.stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Content-based multimedia retrieval engine"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config_path, "Engine configuration file")->check(CLI::ExistingFile);
  app.add_option("--data-dir", o.data_dir, "Override the data directory");

  auto* ingest = app.add_subcommand("ingest", "Ingest media files and build the index");
  ingest->add_option("paths", o.ingest_paths, "Files or directories")->required();
  ingest->add_flag("--no-index", o.no_index, "Skip the index build");

  auto* index = app.add_subcommand("index", "Index maintenance");
  index->require_subcommand(1);
  auto* index_build = index->add_subcommand("build", "Rebuild codebook, kNN indexes and d_max");

  auto* query = app.add_subcommand("query", "Run a query");
  query->add_option("--term", o.terms, "<type>=<file>, type: image, sketch, audio, 3d")->expected(1)->take_all();
  query->add_flag("--component", "Start a new query component");
  query->add_option("--audio-category", o.audio_categories, "fingerprint, matching or version_id (previous term)")
      ->expected(1)
      ->take_all();
  query->add_option("--category", o.term_categories, "<category>=<weight> for the previous term")
      ->expected(1)
      ->take_all();
  query->add_option("--weight", o.term_weights, "Weight of the previous term")->expected(1)->take_all();
  query->add_option("--filter", o.media_filter, "Media types to keep (IMAGE, AUDIO, VIDEO, MODEL_3D)");
  query->add_option("--k", o.k, "Number of results");
  query->add_flag("--json", o.json_out, "Print the REST response document");

  auto* eval = app.add_subcommand("eval", "Run evaluation scenarios");
  eval->add_option("--scenarios", o.scenarios, "Scenario script")->required()->check(CLI::ExistingFile);
  eval->add_option("--server", o.server, "host:port of a running server (default: in-process engine)");
  eval->add_option("--json", o.report_json, "Also write the machine-readable report here");

  auto* serve = app.add_subcommand("serve", "Serve the REST and WebSocket API");
  serve->add_option("--port", o.port, "Port (default from config)");
  serve->add_option("--host", o.host, "Bind address (default from config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*ingest) return run_ingest(o);
    if (*index_build) return run_index(o);
    if (*query) return run_query(*query, o);
    if (*eval) return run_eval(o);
    if (*serve) return run_serve(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
