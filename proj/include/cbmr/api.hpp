#pragma once

// JSON wire format, the request handler shared by REST and WebSocket, and
// the HTTP/WebSocket server.
//
// Every JSON document carries "protocol_version". Reference documents travel
// base64-encoded in the "data" field of a term; "format" (png, ppm, wav, obj)
// is optional and sniffed from the bytes when absent.

#include <atomic>
#include <cstdint>
#include <functional>
#include <future>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include <json.hpp>

#include "cbmr/engine.hpp"
#include "cbmr/error.hpp"

namespace cbmr::api {

inline constexpr int kProtocolVersion = 1;

std::string base64_encode(std::span<const std::uint8_t> bytes);
/// InvalidQuery on malformed input.
Bytes base64_decode(std::string_view text);

/// Decodes a term reference for the given type. A MODEL_3D term accepts an
/// OBJ mesh or a raster silhouette sketch.
Reference decode_reference(TermType type, std::span<const std::uint8_t> bytes, std::string_view format = {});
/// The inverse used by clients: PNG, WAV or OBJ bytes plus the format name.
std::pair<Bytes, std::string> encode_reference(const Reference& reference);

/// Parses a query document; references larger than max_reference_bytes
/// raise PayloadTooLarge.
Query query_from_json(const nlohmann::json& j, std::size_t max_reference_bytes, std::size_t default_k);
nlohmann::json query_to_json(const Query& query);

nlohmann::json result_to_json(const ScoredResult& result);
ScoredResult result_from_json(const nlohmann::json& j);
nlohmann::json response_to_json(const QueryResponse& response);
QueryResponse response_from_json(const nlohmann::json& j);

nlohmann::json object_to_json(const MediaObject& object);
MediaObject object_from_json(const nlohmann::json& j);
nlohmann::json segment_to_json(const SegmentRecord& segment);
nlohmann::json ingest_report_to_json(const IngestReport& report);
nlohmann::json index_report_to_json(const IndexReport& report);
nlohmann::json error_to_json(std::string_view code, std::string_view message);

/// HTTP status for a library error.
int http_status(ErrorCode code);

/// Canonical serialization: sorted keys, shortest round-trip doubles.
std::string canonical(const nlohmann::json& j);

struct HttpRequest {
  std::string method;
  std::string target;  // path plus optional query string
  std::string authorization;
  std::string body;
};

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

using MessageSink = std::function<void(const nlohmann::json&)>;

class ApiHandler {
 public:
  explicit ApiHandler(Engine& engine);
  /// Waits for handlers abandoned after a timeout.
  ~ApiHandler();

  /// Accepts "Bearer <token>" or a bare token; always true without a configured token.
  bool authorized(std::string_view credential) const;

  HttpResponse handle_http(const HttpRequest& request);

  /// Handles one WebSocket text message, emitting replies through `send`.
  /// `send` may be called from a worker thread but never concurrently.
  void handle_ws(const std::string& message, const MessageSink& send);

 private:
  Engine& engine_;
  std::mutex orphans_mu_;
  std::list<std::future<void>> orphans_;

  /// Runs fn on a worker thread; false when it overran the configured timeout.
  bool run_with_timeout(std::function<void()> fn);
  HttpResponse route(const HttpRequest& request);
};

/// Splits "a%20b" style percent-encoding; '+' becomes a space.
std::string url_decode(std::string_view text);
/// Value of a query-string parameter, if present.
std::optional<std::string> query_param(std::string_view target, std::string_view name);

/// REST and WebSocket on one port. Connections are served on their own threads.
class Server {
 public:
  Server(Engine& engine, std::string host, std::uint16_t port);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and starts accepting; returns the bound port (useful with port 0).
  std::uint16_t start();
  void stop();
  /// Blocks until stop() is called.
  void wait();

 private:
  struct State;
  std::unique_ptr<State> state_;
};

}  // namespace cbmr::api
