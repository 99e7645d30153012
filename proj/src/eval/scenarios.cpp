#include <iomanip>
#include <set>
#include <sstream>

#include <httplib.h>

#include "cbmr/api.hpp"
#include "cbmr/error.hpp"
#include "cbmr/eval.hpp"

namespace cbmr::eval {

namespace fs = std::filesystem;
using nlohmann::json;

QueryResponse LocalBackend::query(const json& query) {
  const Query q = api::query_from_json(query, engine_.config().max_upload_bytes, kCutoff);
  return engine_.execute_query(q);
}

std::vector<MediaObject> LocalBackend::objects() { return engine_.objects(); }

RemoteBackend::RemoteBackend(std::string host, int port, std::string token, double timeout_seconds)
    : host_(std::move(host)), port_(port), token_(std::move(token)), timeout_(timeout_seconds) {}

namespace {

ErrorCode code_from_string(std::string_view name) {
  for (int c = 0; c <= static_cast<int>(ErrorCode::Io); ++c)
    if (to_string(static_cast<ErrorCode>(c)) == name) return static_cast<ErrorCode>(c);
  return ErrorCode::EngineUnreachable;
}

}  // namespace

json RemoteBackend::call(const std::string& method, const std::string& path, const std::string& body) {
  httplib::Client client(host_, port_);
  const auto seconds = static_cast<time_t>(timeout_);
  client.set_connection_timeout(5, 0);
  client.set_read_timeout(seconds, 0);
  client.set_write_timeout(seconds, 0);
  httplib::Headers headers;
  if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);
  const auto res = method == "GET" ? client.Get(path, headers) : client.Post(path, headers, body, "application/json");
  if (!res)
    throw Error(ErrorCode::EngineUnreachable, "no response from " + host_ + ":" + std::to_string(port_) + " (" +
                                                  httplib::to_string(res.error()) + ")");
  json out;
  try {
    out = json::parse(res->body);
  } catch (const json::exception&) {
    throw Error(ErrorCode::EngineUnreachable, "non-JSON reply with HTTP " + std::to_string(res->status));
  }
  if (res->status != 200) {
    const auto& err = out.value("error", json::object());
    throw Error(code_from_string(err.value("code", "")), err.value("message", "HTTP " + std::to_string(res->status)));
  }
  return out;
}

QueryResponse RemoteBackend::query(const json& query) {
  return api::response_from_json(call("POST", "/api/query", query.dump()));
}

std::vector<MediaObject> RemoteBackend::objects() {
  std::vector<MediaObject> out;
  for (const auto& o : call("GET", "/api/objects", "").at("objects")) out.push_back(api::object_from_json(o));
  return out;
}

json inline_references(const json& query) {
  json out = query;
  const auto inline_terms = [](json& terms) {
    for (auto& t : terms) {
      if (!t.contains("path")) continue;
      const Bytes bytes = read_file(t.at("path").get<std::string>());
      if (!t.contains("format")) {
        std::string ext = fs::path(t.at("path").get<std::string>()).extension().string();
        if (!ext.empty()) t["format"] = ext.substr(1);
      }
      t["data"] = api::base64_encode(bytes);
      t.erase("path");
    }
  };
  if (out.contains("components"))
    for (auto& c : out["components"]) inline_terms(c["terms"]);
  if (out.contains("terms")) inline_terms(out["terms"]);
  return out;
}

std::vector<Scenario> parse_scenarios(const json& script, const fs::path& base_dir) {
  const auto resolve = [&](const std::string& p) {
    const fs::path path(p);
    return (path.is_absolute() || base_dir.empty() ? path : base_dir / path).lexically_normal().string();
  };
  const auto looks_like_id = [](const std::string& s) {
    return s.size() == 32 && std::all_of(s.begin(), s.end(), [](char c) { return std::isxdigit(static_cast<unsigned char>(c)); });
  };
  std::vector<Scenario> out;
  try {
    if (!script.is_object() || !script.contains("scenarios") || !script.at("scenarios").is_array())
      throw Error(ErrorCode::MalformedScript, "expected {\"scenarios\": [...]}");
    for (const auto& s : script.at("scenarios")) {
      Scenario sc;
      sc.id = s.at("id").is_string() ? s.at("id").get<std::string>() : s.at("id").dump();
      sc.description = s.value("description", "");
      if (!s.at("queries").is_array() || s.at("queries").empty())
        throw Error(ErrorCode::MalformedScript, "scenario " + sc.id + " has no queries");
      for (json q : s.at("queries")) {
        const auto fix = [&](json& terms) {
          if (!terms.is_array()) throw Error(ErrorCode::MalformedScript, "scenario " + sc.id + ": terms must be an array");
          for (auto& t : terms) {
            if (!t.is_object() || !t.contains("type"))
              throw Error(ErrorCode::MalformedScript, "scenario " + sc.id + ": term without type");
            if (t.contains("path")) t["path"] = resolve(t.at("path").get<std::string>());
          }
        };
        if (q.contains("components"))
          for (auto& c : q["components"]) fix(c.at("terms"));
        else if (q.contains("terms"))
          fix(q["terms"]);
        else
          throw Error(ErrorCode::MalformedScript, "scenario " + sc.id + ": query without components");
        sc.queries.push_back(std::move(q));
      }
      for (const auto& key : {"planted", "same_class"}) {
        auto& list = std::string(key) == "planted" ? sc.planted : sc.same_class;
        for (const auto& g : s.value(key, json::array())) {
          const std::string v = g.get<std::string>();
          list.push_back(looks_like_id(v) ? v : resolve(v));
        }
      }
      out.push_back(std::move(sc));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedScript, e.what());
  }
  return out;
}

std::vector<Scenario> load_scenarios(const fs::path& path) {
  const Bytes bytes = read_file(path);
  json script;
  try {
    script = json::parse(bytes.begin(), bytes.end());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedScript, e.what());
  }
  return parse_scenarios(script, path.parent_path());
}

namespace {

// Object ids for ground-truth entries given as ids or file paths.
std::set<std::string> resolve_ids(const std::vector<std::string>& entries, const std::vector<MediaObject>& objects) {
  std::set<std::string> out;
  for (const auto& e : entries) {
    bool matched = false;
    for (const auto& o : objects) {
      if (o.object_id == e || o.path == fs::absolute(e).lexically_normal().string()) {
        out.insert(o.object_id);
        matched = true;
      }
    }
    if (!matched && fs::is_regular_file(e)) out.insert(content_id(read_file(e)));
    if (!matched) out.insert(e);
  }
  return out;
}

}  // namespace

std::vector<ScenarioResult> run_scenarios(const std::vector<Scenario>& scenarios, Backend& backend,
                                          const NdcgOptions& options) {
  const auto objects = backend.objects();
  std::vector<ScenarioResult> out;
  for (const auto& sc : scenarios) {
    ScenarioResult result;
    result.id = sc.id;
    result.description = sc.description;
    QueryResponse last;
    for (const auto& q : sc.queries) {
      last = backend.query(inline_references(q));
      ++result.query_count;
    }
    const auto planted = resolve_ids(sc.planted, objects);
    const auto same_class = resolve_ids(sc.same_class, objects);
    const auto ranked = aggregate_objects(last.results);
    for (std::size_t i = 0; i < std::min(ranked.size(), kCutoff); ++i) {
      const std::string& id = ranked[i].first;
      const int rating = planted.count(id) ? 3 : same_class.count(id) ? 2 : 0;
      result.judgments.push_back({static_cast<int>(i + 1), rating});
      result.ranked_objects.push_back(id);
    }
    score(result, options);
    out.push_back(std::move(result));
  }
  return out;
}

std::string format_report(const std::vector<ScenarioResult>& results) {
  std::ostringstream os;
  os << std::fixed;
  const auto row = [&](const std::string& id, double ndcg, double p, double mrr, double map, double success,
                       const std::string& queries) {
    os << std::left << std::setw(10) << id << std::right << std::setprecision(4) << std::setw(10) << ndcg
       << std::setw(10) << p << std::setw(10) << mrr << std::setw(10) << map << std::setprecision(0) << std::setw(13)
       << success * 100.0 << "%" << std::setw(11) << queries << "\n";
  };
  os << std::left << std::setw(10) << "#" << std::right << std::setw(10) << "NDCG@15" << std::setw(10) << "p@15"
     << std::setw(10) << "MRR" << std::setw(10) << "MAP" << std::setw(14) << "Success rate" << std::setw(11)
     << "# queries" << "\n";
  double n = 0, p = 0, m = 0, a = 0, s = 0, q = 0;
  for (const auto& r : results) {
    row(r.id, r.ndcg, r.precision, r.mrr, r.map, r.success ? 1.0 : 0.0, std::to_string(r.query_count));
    n += r.ndcg;
    p += r.precision;
    m += r.mrr;
    a += r.map;
    s += r.success ? 1.0 : 0.0;
    q += static_cast<double>(r.query_count);
  }
  if (!results.empty()) {
    const double c = static_cast<double>(results.size());
    std::ostringstream queries;
    queries << std::fixed << std::setprecision(1) << q / c;
    row("mean", n / c, p / c, m / c, a / c, s / c, queries.str());
  }
  return os.str();
}

json report_to_json(const std::vector<ScenarioResult>& results) {
  json rows = json::array();
  for (const auto& r : results) {
    json judgments = json::array();
    for (const auto& j : r.judgments) judgments.push_back(json{{"rank", j.rank}, {"rating", j.rating}});
    rows.push_back(json{{"id", r.id},
                        {"description", r.description},
                        {"ndcg_at_15", r.ndcg},
                        {"p_at_15", r.precision},
                        {"mrr", r.mrr},
                        {"map", r.map},
                        {"success", r.success},
                        {"query_count", r.query_count},
                        {"judgments", std::move(judgments)},
                        {"objects", r.ranked_objects}});
  }
  return json{{"protocol_version", api::kProtocolVersion}, {"scenarios", std::move(rows)}};
}

}  // namespace cbmr::eval
