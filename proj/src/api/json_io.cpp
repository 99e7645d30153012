#include <algorithm>
#include <cmath>

#include <openssl/evp.h>

#include "cbmr/api.hpp"
#include "cbmr/error.hpp"

namespace cbmr::api {

using nlohmann::json;

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  if (bytes.empty()) return out;
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(), static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

Bytes base64_decode(std::string_view text) {
  std::string clean;
  clean.reserve(text.size());
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) clean.push_back(c);
  if (clean.size() % 4 != 0) throw Error(ErrorCode::InvalidQuery, "base64 length is not a multiple of 4");
  if (clean.empty()) return {};
  Bytes out(clean.size() / 4 * 3);
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(clean.data()),
                                static_cast<int>(clean.size()));
  if (n < 0) throw Error(ErrorCode::InvalidQuery, "malformed base64");
  std::size_t pad = 0;
  if (clean.back() == '=') ++pad;
  if (clean[clean.size() - 2] == '=') ++pad;
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

namespace {

enum class Payload { Image, Audio, Mesh };

Payload sniff(std::span<const std::uint8_t> bytes, std::string_view format) {
  std::string f(format);
  std::transform(f.begin(), f.end(), f.begin(), [](unsigned char c) { return std::tolower(c); });
  if (f == "png" || f == "ppm" || f == "image") return Payload::Image;
  if (f == "wav" || f == "audio") return Payload::Audio;
  if (f == "obj" || f == "mesh") return Payload::Mesh;
  if (!f.empty()) throw Error(ErrorCode::UnsupportedFormat, "unknown reference format '" + f + "'");
  const auto starts = [&](std::string_view magic) {
    return bytes.size() >= magic.size() && std::equal(magic.begin(), magic.end(), bytes.begin(),
                                                      [](char a, std::uint8_t b) { return static_cast<std::uint8_t>(a) == b; });
  };
  if (starts("\x89PNG") || starts("P6") || starts("P3")) return Payload::Image;
  if (starts("RIFF")) return Payload::Audio;
  return Payload::Mesh;
}

template <class T>
T field(const json& j, const char* key, T fallback) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  return it->get<T>();
}

std::optional<std::set<MediaType>> media_filter_from_json(const json& j) {
  const auto it = j.find("media_filter");
  if (it == j.end() || it->is_null()) return std::nullopt;
  std::set<MediaType> out;
  for (const auto& m : *it) out.insert(media_type_from_string(m.get<std::string>()));
  return out;
}

json media_filter_to_json(const std::optional<std::set<MediaType>>& filter) {
  if (!filter) return nullptr;
  json out = json::array();
  for (auto m : *filter) out.push_back(std::string(to_string(m)));
  return out;
}

}  // namespace

Reference decode_reference(TermType type, std::span<const std::uint8_t> bytes, std::string_view format) {
  if (bytes.empty()) throw Error(ErrorCode::InvalidQuery, "empty reference document");
  const Payload payload = sniff(bytes, format);
  const bool ok = (type == TermType::Image && payload == Payload::Image) ||
                  (type == TermType::Audio && payload == Payload::Audio) ||
                  (type == TermType::Model3D && payload != Payload::Audio);
  if (!ok) throw Error(ErrorCode::InvalidQuery, std::string(to_string(type)) + " term cannot take this reference format");
  switch (payload) {
    case Payload::Image: return decode_image(bytes);
    case Payload::Audio: return decode_audio(bytes);
    case Payload::Mesh:
      return decode_mesh(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  }
  return {};
}

std::pair<Bytes, std::string> encode_reference(const Reference& reference) {
  if (const auto* img = std::get_if<RasterImage>(&reference)) return {encode_png(*img), "png"};
  if (const auto* audio = std::get_if<AudioBuffer>(&reference)) return {encode_wav(*audio), "wav"};
  if (const auto* mesh = std::get_if<TriangleMesh>(&reference)) {
    const std::string text = encode_obj(*mesh);
    return {Bytes(text.begin(), text.end()), "obj"};
  }
  return {{}, ""};
}

Query query_from_json(const json& j, std::size_t max_reference_bytes, std::size_t default_k) {
  try {
    if (!j.is_object()) throw Error(ErrorCode::InvalidQuery, "query must be a JSON object");
    Query q;
    q.k = field<std::size_t>(j, "k", default_k);
    q.media_filter = media_filter_from_json(j);
    json components;
    if (j.contains("components")) components = j.at("components");
    else if (j.contains("terms")) components = json::array({json{{"terms", j.at("terms")}}});
    else throw Error(ErrorCode::InvalidQuery, "query has no components");
    if (!components.is_array()) throw Error(ErrorCode::InvalidQuery, "components must be an array");
    for (const auto& c : components) {
      QueryComponent component;
      for (const auto& t : c.at("terms")) {
        QueryTerm term;
        term.type = term_type_from_string(t.at("type").get<std::string>());
        term.weight = field<double>(t, "weight", 1.0);
        if (t.contains("audio_category") && !t.at("audio_category").is_null())
          term.audio_category = audio_category_from_string(t.at("audio_category").get<std::string>());
        if (t.contains("categories") && !t.at("categories").is_null())
          term.categories = t.at("categories").get<std::map<std::string, double>>();
        if (term.type != TermType::Motion) {
          const std::string& b64 = t.at("data").get_ref<const std::string&>();
          if (b64.size() / 4 * 3 > max_reference_bytes + 3)
            throw Error(ErrorCode::PayloadTooLarge, "reference document exceeds the upload limit");
          const Bytes bytes = base64_decode(b64);
          if (bytes.size() > max_reference_bytes)
            throw Error(ErrorCode::PayloadTooLarge, "reference document exceeds the upload limit");
          term.reference = decode_reference(term.type, bytes, field<std::string>(t, "format", ""));
        }
        component.terms.push_back(std::move(term));
      }
      q.components.push_back(std::move(component));
    }
    return q;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidQuery, std::string("malformed query: ") + e.what());
  }
}

json query_to_json(const Query& query) {
  json components = json::array();
  for (const auto& c : query.components) {
    json terms = json::array();
    for (const auto& t : c.terms) {
      json term{{"type", std::string(to_string(t.type))}, {"weight", t.weight}};
      if (!t.categories.empty()) term["categories"] = t.categories;
      if (t.audio_category) term["audio_category"] = std::string(to_string(*t.audio_category));
      auto [bytes, format] = encode_reference(t.reference);
      if (!format.empty()) {
        term["data"] = base64_encode(bytes);
        term["format"] = format;
      }
      terms.push_back(std::move(term));
    }
    components.push_back(json{{"terms", std::move(terms)}});
  }
  json out{{"protocol_version", kProtocolVersion}, {"components", std::move(components)}, {"k", query.k}};
  if (query.media_filter) out["media_filter"] = media_filter_to_json(query.media_filter);
  return out;
}

json result_to_json(const ScoredResult& r) {
  return json{{"segment_id", r.segment_id}, {"object_id", r.object_id}, {"score", r.score},
              {"per_category", r.per_category}};
}

ScoredResult result_from_json(const json& j) {
  return {j.at("segment_id").get<std::string>(), j.at("object_id").get<std::string>(), j.at("score").get<double>(),
          j.at("per_category").get<std::map<std::string, double>>()};
}

json response_to_json(const QueryResponse& response) {
  json results = json::array();
  for (const auto& r : response.results) results.push_back(result_to_json(r));
  return json{{"protocol_version", kProtocolVersion}, {"session_id", response.session_id}, {"results", std::move(results)}};
}

QueryResponse response_from_json(const json& j) {
  QueryResponse out;
  out.session_id = j.at("session_id").get<std::string>();
  for (const auto& r : j.at("results")) out.results.push_back(result_from_json(r));
  return out;
}

json object_to_json(const MediaObject& o) {
  return json{{"object_id", o.object_id}, {"media_type", std::string(to_string(o.media_type))},
              {"path", o.path}, {"name", o.name}, {"size", o.size_bytes}};
}

MediaObject object_from_json(const json& j) {
  return {j.at("object_id").get<std::string>(), media_type_from_string(j.at("media_type").get<std::string>()),
          j.at("path").get<std::string>(), j.at("name").get<std::string>(), j.at("size").get<std::uint64_t>()};
}

json segment_to_json(const SegmentRecord& s) {
  return json{{"segment_id", s.segment_id}, {"object_id", s.object_id}, {"sequence_number", s.sequence_number},
              {"start", s.start}, {"end", s.end}, {"unit", std::string(to_string(s.unit))}};
}

json ingest_report_to_json(const IngestReport& report) {
  json objects = json::array();
  for (const auto& o : report.objects)
    objects.push_back(json{{"path", o.path},
                           {"object_id", o.object_id},
                           {"media_type", std::string(to_string(o.media_type))},
                           {"segments", o.segments},
                           {"vectors", o.vectors},
                           {"hashes", o.hashes},
                           {"duplicate", o.duplicate}});
  json failures = json::array();
  for (const auto& f : report.failures) failures.push_back(json{{"path", f.path}, {"error", f.error}});
  return json{{"protocol_version", kProtocolVersion}, {"objects", std::move(objects)}, {"failures", std::move(failures)}};
}

json index_report_to_json(const IndexReport& report) {
  return json{{"protocol_version", kProtocolVersion}, {"codebook_k", report.codebook_k}, {"rows", report.rows},
              {"d_max", report.d_max}, {"seconds", report.seconds}};
}

json error_to_json(std::string_view code, std::string_view message) {
  return json{{"protocol_version", kProtocolVersion}, {"error", {{"code", code}, {"message", message}}}};
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownId:
    case ErrorCode::UnknownSegment: return 404;
    case ErrorCode::SessionExpired: return 410;
    case ErrorCode::IndexStale: return 409;
    case ErrorCode::PayloadTooLarge: return 413;
    case ErrorCode::Unauthorized: return 401;
    case ErrorCode::EngineUnreachable: return 503;
    case ErrorCode::Io: return 500;
    default: return 400;
  }
}

std::string canonical(const json& j) { return j.dump(); }

}  // namespace cbmr::api
