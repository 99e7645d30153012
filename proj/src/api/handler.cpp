#include <chrono>

#include "cbmr/api.hpp"
#include "cbmr/error.hpp"

namespace cbmr::api {

using nlohmann::json;

std::string url_decode(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '+') {
      out.push_back(' ');
    } else if (text[i] == '%' && i + 2 < text.size() && std::isxdigit(static_cast<unsigned char>(text[i + 1])) &&
               std::isxdigit(static_cast<unsigned char>(text[i + 2]))) {
      out.push_back(static_cast<char>(std::stoi(std::string(text.substr(i + 1, 2)), nullptr, 16)));
      i += 2;
    } else {
      out.push_back(text[i]);
    }
  }
  return out;
}

std::optional<std::string> query_param(std::string_view target, std::string_view name) {
  const auto q = target.find('?');
  if (q == std::string_view::npos) return std::nullopt;
  std::string_view rest = target.substr(q + 1);
  while (!rest.empty()) {
    const auto amp = rest.find('&');
    const std::string_view pair = rest.substr(0, amp);
    const auto eq = pair.find('=');
    if (url_decode(pair.substr(0, eq)) == name)
      return eq == std::string_view::npos ? std::string() : url_decode(pair.substr(eq + 1));
    if (amp == std::string_view::npos) break;
    rest = rest.substr(amp + 1);
  }
  return std::nullopt;
}

namespace {

std::vector<std::string> path_parts(std::string_view target) {
  target = target.substr(0, target.find('?'));
  std::vector<std::string> parts;
  while (!target.empty()) {
    const auto slash = target.find('/');
    if (slash != 0) parts.push_back(url_decode(target.substr(0, slash)));
    if (slash == std::string_view::npos) break;
    target = target.substr(slash + 1);
  }
  return parts;
}

HttpResponse json_response(int status, const json& body) { return {status, "application/json", canonical(body)}; }

HttpResponse error_response(const Error& e) {
  const std::string what = e.what();
  const auto colon = what.find(": ");
  return json_response(http_status(e.code()),
                       error_to_json(to_string(e.code()), colon == std::string::npos ? what : what.substr(colon + 2)));
}

json parse_body(const std::string& body) {
  if (body.empty()) return json::object();
  try {
    return json::parse(body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidQuery, std::string("malformed JSON: ") + e.what());
  }
}

std::optional<std::set<MediaType>> filter_of(const json& j) {
  const auto it = j.find("media_filter");
  if (it == j.end() || it->is_null()) return std::nullopt;
  std::set<MediaType> out;
  for (const auto& m : *it) out.insert(media_type_from_string(m.get<std::string>()));
  return out;
}

QueryResponse run_mlt(Engine& engine, const json& j) {
  try {
    const auto categories = j.contains("categories") && !j.at("categories").is_null()
                                ? j.at("categories").get<std::map<std::string, double>>()
                                : std::map<std::string, double>{};
    return engine.more_like_this(j.at("segment_id").get<std::string>(), categories,
                                 j.value("k", engine.config().default_k), filter_of(j));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidQuery, std::string("malformed request: ") + e.what());
  }
}

QueryResponse run_refine(Engine& engine, const json& j) {
  try {
    const auto weights = j.contains("weights") && !j.at("weights").is_null()
                             ? j.at("weights").get<std::map<std::string, double>>()
                             : std::map<std::string, double>{};
    std::optional<std::size_t> k;
    if (j.contains("k") && !j.at("k").is_null()) k = j.at("k").get<std::size_t>();
    return engine.refine(j.at("session_id").get<std::string>(), weights, filter_of(j), k);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidQuery, std::string("malformed request: ") + e.what());
  }
}

std::size_t body_limit(const Engine& engine) {
  // Base64 inflates by 4/3; leave room for the JSON envelope.
  return engine.config().max_upload_bytes / 3 * 4 + (64u << 10);
}

}  // namespace

ApiHandler::ApiHandler(Engine& engine) : engine_(engine) {}

ApiHandler::~ApiHandler() {
  std::lock_guard lock(orphans_mu_);
  for (auto& f : orphans_) f.wait();
}

bool ApiHandler::authorized(std::string_view credential) const {
  const std::string& token = engine_.config().token;
  if (token.empty()) return true;
  if (credential.rfind("Bearer ", 0) == 0) credential.remove_prefix(7);
  return credential == token;
}

bool ApiHandler::run_with_timeout(std::function<void()> fn) {
  std::future<void> done = std::async(std::launch::async, std::move(fn));
  const auto limit = std::chrono::duration<double>(engine_.config().timeout_seconds);
  if (done.wait_for(limit) == std::future_status::ready) return true;
  std::lock_guard lock(orphans_mu_);
  orphans_.remove_if([](const std::future<void>& f) {
    return f.wait_for(std::chrono::seconds(0)) == std::future_status::ready;
  });
  orphans_.push_back(std::move(done));
  return false;
}

HttpResponse ApiHandler::handle_http(const HttpRequest& request) {
  const std::string credential = request.authorization.empty()
                                     ? query_param(request.target, "token").value_or("")
                                     : request.authorization;
  if (!authorized(credential))
    return json_response(401, error_to_json(to_string(ErrorCode::Unauthorized), "missing or wrong token"));
  if (request.body.size() > body_limit(engine_))
    return json_response(413, error_to_json(to_string(ErrorCode::PayloadTooLarge), "request body too large"));

  auto result = std::make_shared<HttpResponse>();
  const bool finished = run_with_timeout([this, request, result] {
    try {
      *result = route(request);
    } catch (const Error& e) {
      *result = error_response(e);
    } catch (const std::exception& e) {
      *result = json_response(500, error_to_json("Internal", e.what()));
    }
  });
  if (!finished) return json_response(503, error_to_json("Timeout", "request exceeded the configured timeout"));
  return *result;
}

HttpResponse ApiHandler::route(const HttpRequest& request) {
  const auto parts = path_parts(request.target);
  const std::string& m = request.method;
  const auto is = [&](std::initializer_list<std::string_view> want) {
    return parts.size() == want.size() && std::equal(want.begin(), want.end(), parts.begin());
  };
  const std::size_t max_ref = engine_.config().max_upload_bytes;

  if (m == "POST" && is({"api", "query"})) {
    const Query q = query_from_json(parse_body(request.body), max_ref, engine_.config().default_k);
    return json_response(200, response_to_json(engine_.execute_query(q)));
  }
  if (m == "POST" && is({"api", "more-like-this"})) return json_response(200, response_to_json(run_mlt(engine_, parse_body(request.body))));
  if (m == "POST" && is({"api", "refine"})) return json_response(200, response_to_json(run_refine(engine_, parse_body(request.body))));
  if (m == "POST" && is({"api", "index", "build"})) return json_response(200, index_report_to_json(engine_.build_index()));
  if (m == "POST" && is({"api", "ingest"})) {
    const json body = parse_body(request.body);
    IngestReport total;
    try {
      for (const auto& f : body.value("files", json::array())) {
        const Bytes bytes = base64_decode(f.at("data").get<std::string>());
        if (bytes.size() > max_ref) throw Error(ErrorCode::PayloadTooLarge, "upload exceeds the limit");
        const std::string name = f.at("name").get<std::string>();
        try {
          IngestReport r = engine_.ingest_bytes(name, bytes);
          total.objects.insert(total.objects.end(), r.objects.begin(), r.objects.end());
          total.failures.insert(total.failures.end(), r.failures.begin(), r.failures.end());
        } catch (const Error& e) {
          total.failures.push_back({name, e.what()});
        }
      }
      std::vector<std::filesystem::path> paths;
      for (const auto& p : body.value("paths", json::array())) paths.emplace_back(p.get<std::string>());
      if (!paths.empty()) {
        IngestReport r = engine_.ingest(paths);
        total.objects.insert(total.objects.end(), r.objects.begin(), r.objects.end());
        total.failures.insert(total.failures.end(), r.failures.begin(), r.failures.end());
      }
    } catch (const json::exception& e) {
      throw Error(ErrorCode::InvalidQuery, std::string("malformed ingest request: ") + e.what());
    }
    return json_response(200, ingest_report_to_json(total));
  }
  if (m == "GET" && is({"api", "objects"})) {
    json objects = json::array();
    const auto name = query_param(request.target, "name");
    for (const auto& o : name ? engine_.find_objects(*name) : engine_.objects()) objects.push_back(object_to_json(o));
    return json_response(200, json{{"protocol_version", kProtocolVersion}, {"objects", std::move(objects)}});
  }
  if (m == "GET" && parts.size() == 3 && parts[0] == "api" && parts[1] == "objects") {
    try {
      const ObjectRecord record = engine_.object(parts[2]);
      json segments = json::array();
      for (const auto& s : record.segments) segments.push_back(segment_to_json(s));
      return json_response(200, json{{"protocol_version", kProtocolVersion},
                                     {"object", object_to_json(record.object)},
                                     {"segments", std::move(segments)}});
    } catch (const Error& e) {
      if (e.code() == ErrorCode::UnknownId || e.code() == ErrorCode::UnknownSegment)
        throw Error(ErrorCode::UnknownId, "no object '" + parts[2] + "'");
      throw;
    }
  }
  if (m == "GET" && parts.size() == 3 && parts[0] == "api" && parts[1] == "segments") {
    json out = segment_to_json(engine_.segment(parts[2]));
    out["protocol_version"] = kProtocolVersion;
    return json_response(200, out);
  }
  if (m == "GET" && parts.size() == 4 && parts[0] == "api" && parts[1] == "segments" && parts[3] == "preview") {
    const Preview p = engine_.preview(parts[2]);
    return {200, p.content_type, std::string(p.bytes.begin(), p.bytes.end())};
  }
  if (m == "GET" && is({"api", "status"})) {
    return json_response(200, json{{"protocol_version", kProtocolVersion},
                                   {"index_fresh", engine_.index_fresh()},
                                   {"objects", engine_.objects().size()}});
  }
  return json_response(404, error_to_json("NotFound", "no route for " + m + " " + request.target));
}

void ApiHandler::handle_ws(const std::string& message, const MessageSink& send) {
  const auto error_payload = [](std::string_view code, std::string_view text, int status) {
    return json{{"code", code}, {"message", text}, {"status", status}};
  };
  json envelope;
  try {
    envelope = json::parse(message);
  } catch (const json::exception& e) {
    send(json{{"protocol_version", kProtocolVersion},
              {"message_type", "ERROR"},
              {"request_id", ""},
              {"payload", error_payload(to_string(ErrorCode::InvalidQuery), std::string("malformed JSON: ") + e.what(), 400)}});
    return;
  }
  std::string request_id;
  if (envelope.is_object() && envelope.contains("request_id")) {
    const auto& id = envelope.at("request_id");
    request_id = id.is_string() ? id.get<std::string>() : id.dump();
  }
  const auto reply = [request_id](const MessageSink& out, std::string_view type, json payload) {
    out(json{{"protocol_version", kProtocolVersion},
             {"message_type", type},
             {"request_id", request_id},
             {"payload", std::move(payload)}});
  };
  if (message.size() > body_limit(engine_)) {
    reply(send, "ERROR", error_payload(to_string(ErrorCode::PayloadTooLarge), "message too large", 413));
    return;
  }
  const std::string type = envelope.is_object() && envelope.contains("message_type") && envelope.at("message_type").is_string()
                               ? envelope.at("message_type").get<std::string>()
                               : "";
  if (type != "QUERY" && type != "MLT" && type != "REFINE") {
    reply(send, "ERROR", error_payload("UnknownMessageType", "unknown message_type '" + type + "'", 400));
    return;
  }
  const json payload = envelope.value("payload", json::object());

  // Late messages from a handler that overran the timeout are dropped.
  struct Guard {
    std::mutex mu;
    bool open = true;
    MessageSink send;
  };
  auto guard = std::make_shared<Guard>();
  guard->send = send;
  const MessageSink guarded = [guard](const json& j) {
    std::lock_guard lock(guard->mu);
    if (guard->open) guard->send(j);
  };

  const bool finished = run_with_timeout([this, type, payload, guarded, reply, error_payload] {
    try {
      if (type == "QUERY") {
        const Query q = query_from_json(payload, engine_.config().max_upload_bytes, engine_.config().default_k);
        reply(guarded, "QUERY_START", json{{"k", q.k}, {"components", q.components.size()}});
        const QueryResponse response = engine_.execute_query(q, [&](const CategoryBatch& batch) {
          json top = json::array();
          for (const auto& [seg, score] : batch.top) top.push_back(json{{"segment_id", seg}, {"score", score}});
          reply(guarded, "RESULT_BATCH",
                json{{"component", batch.component}, {"term", batch.term}, {"category", batch.category}, {"results", top}});
        });
        reply(guarded, "QUERY_END", response_to_json(response));
      } else if (type == "MLT") {
        reply(guarded, "QUERY_START", json{{"segment_id", payload.value("segment_id", "")}});
        reply(guarded, "QUERY_END", response_to_json(run_mlt(engine_, payload)));
      } else {
        reply(guarded, "QUERY_END", response_to_json(run_refine(engine_, payload)));
      }
    } catch (const Error& e) {
      const std::string what = e.what();
      const auto colon = what.find(": ");
      reply(guarded, "ERROR",
            error_payload(to_string(e.code()), colon == std::string::npos ? what : what.substr(colon + 2),
                          http_status(e.code())));
    } catch (const std::exception& e) {
      reply(guarded, "ERROR", error_payload("Internal", e.what(), 500));
    }
  });
  if (!finished) {
    std::lock_guard lock(guard->mu);
    guard->open = false;
    reply(send, "ERROR", error_payload("Timeout", "request exceeded the configured timeout", 503));
  }
}

}  // namespace cbmr::api
