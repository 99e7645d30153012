#include <sys/socket.h>

#include <condition_variable>
#include <set>

#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "cbmr/api.hpp"
#include "cbmr/error.hpp"

namespace cbmr::api {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

struct Server::State {
  Engine& engine;
  ApiHandler handler;
  std::string host;
  std::uint16_t port;
  asio::io_context ioc;
  std::optional<tcp::acceptor> acceptor;
  std::thread accept_thread;

  std::mutex mu;
  std::condition_variable stopped_cv;
  bool running = false;
  bool stopping = false;
  std::set<int> open_fds;
  struct Worker {
    std::thread thread;
    std::shared_ptr<std::atomic<bool>> done;
  };
  std::list<Worker> workers;

  State(Engine& e, std::string h, std::uint16_t p) : engine(e), handler(e), host(std::move(h)), port(p) {}

  std::size_t body_limit() const { return engine.config().max_upload_bytes / 3 * 4 + (64u << 10); }

  void serve_websocket(tcp::socket& socket, http::request<http::string_body>&& req) {
    websocket::stream<tcp::socket&> ws(socket);
    ws.read_message_max(body_limit());
    ws.accept(req);
    std::mutex write_mu;
    const MessageSink sink = [&ws, &write_mu](const nlohmann::json& j) {
      std::lock_guard lock(write_mu);
      beast::error_code ec;
      ws.text(true);
      ws.write(asio::buffer(canonical(j)), ec);
    };
    beast::flat_buffer buffer;
    for (;;) {
      beast::error_code ec;
      buffer.clear();
      ws.read(buffer, ec);
      if (ec) break;
      handler.handle_ws(beast::buffers_to_string(buffer.data()), sink);
    }
  }

  void serve(tcp::socket socket) {
    beast::flat_buffer buffer;
    for (;;) {
      beast::error_code ec;
      http::request_parser<http::string_body> parser;
      parser.body_limit(body_limit());
      http::read(socket, buffer, parser, ec);
      if (ec == http::error::body_limit) {
        http::response<http::string_body> res{http::status::payload_too_large, 11};
        res.set(http::field::content_type, "application/json");
        res.body() = canonical(error_to_json(to_string(ErrorCode::PayloadTooLarge), "request body too large"));
        res.prepare_payload();
        http::write(socket, res, ec);
        break;
      }
      if (ec) break;
      http::request<http::string_body> req = parser.release();
      const std::string target(req.target());

      if (websocket::is_upgrade(req)) {
        const std::string path = target.substr(0, target.find('?'));
        std::string credential(req[http::field::authorization]);
        if (credential.empty()) credential = query_param(target, "token").value_or("");
        const int status = path != "/ws" ? 404 : handler.authorized(credential) ? 0 : 401;
        if (status == 0) {
          try {
            serve_websocket(socket, std::move(req));
          } catch (const std::exception&) {
          }
          break;
        }
        http::response<http::string_body> res{static_cast<http::status>(status), req.version()};
        res.set(http::field::content_type, "application/json");
        res.body() = canonical(status == 404 ? error_to_json("NotFound", "no WebSocket endpoint at " + path)
                                             : error_to_json(to_string(ErrorCode::Unauthorized), "missing or wrong token"));
        res.prepare_payload();
        http::write(socket, res, ec);
        break;
      }

      const HttpResponse out = handler.handle_http(
          {std::string(req.method_string()), target, std::string(req[http::field::authorization]), std::move(req.body())});
      http::response<http::string_body> res{static_cast<http::status>(out.status), req.version()};
      res.set(http::field::content_type, out.content_type);
      res.keep_alive(req.keep_alive());
      res.body() = out.body;
      res.prepare_payload();
      http::write(socket, res, ec);
      if (ec || !res.keep_alive()) break;
    }
    beast::error_code ignored;
    socket.shutdown(tcp::socket::shutdown_both, ignored);
  }

  void accept_loop() {
    for (;;) {
      tcp::socket socket(ioc);
      beast::error_code ec;
      acceptor->accept(socket, ec);
      std::lock_guard lock(mu);
      if (stopping) break;
      if (ec) continue;
      workers.remove_if([](Worker& w) {
        if (!w.done->load()) return false;
        w.thread.join();
        return true;
      });
      const int fd = socket.native_handle();
      open_fds.insert(fd);
      auto done = std::make_shared<std::atomic<bool>>(false);
      workers.push_back({std::thread([this, fd, done, s = std::move(socket)]() mutable {
                           serve(std::move(s));
                           {
                             std::lock_guard l(mu);
                             open_fds.erase(fd);
                           }
                           done->store(true);
                         }),
                         done});
    }
  }
};

Server::Server(Engine& engine, std::string host, std::uint16_t port)
    : state_(std::make_unique<State>(engine, std::move(host), port)) {}

Server::~Server() { stop(); }

std::uint16_t Server::start() {
  auto& s = *state_;
  beast::error_code ec;
  const auto address = asio::ip::make_address(s.host, ec);
  if (ec) throw Error(ErrorCode::InvalidConfig, "bad host address '" + s.host + "'");
  s.acceptor.emplace(s.ioc);
  const tcp::endpoint endpoint(address, s.port);
  s.acceptor->open(endpoint.protocol(), ec);
  if (!ec) s.acceptor->set_option(asio::socket_base::reuse_address(true), ec);
  if (!ec) s.acceptor->bind(endpoint, ec);
  if (!ec) s.acceptor->listen(asio::socket_base::max_listen_connections, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot listen on " + s.host + ":" + std::to_string(s.port) + ": " + ec.message());
  s.port = s.acceptor->local_endpoint().port();
  s.running = true;
  s.accept_thread = std::thread([&s] { s.accept_loop(); });
  return s.port;
}

void Server::stop() {
  auto& s = *state_;
  {
    std::lock_guard lock(s.mu);
    if (!s.running || s.stopping) return;
    s.stopping = true;
    ::shutdown(s.acceptor->native_handle(), SHUT_RDWR);
    for (int fd : s.open_fds) ::shutdown(fd, SHUT_RDWR);
  }
  if (s.accept_thread.joinable()) s.accept_thread.join();
  for (auto& w : s.workers) w.thread.join();
  s.workers.clear();
  beast::error_code ignored;
  s.acceptor->close(ignored);
  {
    std::lock_guard lock(s.mu);
    s.running = false;
  }
  s.stopped_cv.notify_all();
}

void Server::wait() {
  auto& s = *state_;
  std::unique_lock lock(s.mu);
  s.stopped_cv.wait(lock, [&] { return !s.running; });
}

}  // namespace cbmr::api
