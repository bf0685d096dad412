#include "citywall/sync/web_server.hpp"

#include <condition_variable>
#include <thread>
#include <vector>

#include <boost/asio/signal_set.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

namespace citywall::sync {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

struct Routes {
  std::string layout_json;
  std::string configs_json;
};

std::string query_param(const std::string& target, const std::string& key) {
  const auto q = target.find('?');
  if (q == std::string::npos) return {};
  std::size_t start = q + 1;
  while (start < target.size()) {
    auto end = target.find('&', start);
    if (end == std::string::npos) end = target.size();
    const auto eq = target.find('=', start);
    if (eq < end && target.compare(start, eq - start, key) == 0) {
      return target.substr(eq + 1, end - eq - 1);
    }
    start = end + 1;
  }
  return {};
}

std::string_view path_of(std::string_view target) {
  return target.substr(0, target.find('?'));
}

std::string_view std_view(beast::string_view s) { return {s.data(), s.size()}; }

class WebSocketSession : public std::enable_shared_from_this<WebSocketSession> {
 public:
  WebSocketSession(tcp::socket&& socket, ProtocolEndpoint& endpoint)
      : ws_(std::move(socket)), endpoint_(endpoint) {}

  void run(http::request<http::string_body> request) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.text(true);
    target_ = std::string(request.target());
    ws_.async_accept(request, beast::bind_front_handler(&WebSocketSession::on_accept,
                                                        shared_from_this()));
  }

 private:
  class Sink final : public FrameSink {
   public:
    explicit Sink(std::weak_ptr<WebSocketSession> session)
        : session_(std::move(session)) {}
    void send(Frame frame) override {
      auto session = session_.lock();
      if (!session) return;
      // Posting keeps the room's delivery order: one strand per session.
      net::post(session->ws_.get_executor(),
                [session, frame = std::move(frame)]() mutable {
                  session->enqueue(std::move(frame));
                });
    }

   private:
    std::weak_ptr<WebSocketSession> session_;
  };

  void on_accept(beast::error_code ec) {
    if (ec) return;
    connection_ = endpoint_.open(std::make_shared<Sink>(weak_from_this()));
    open_ = true;
    const auto room = query_param(target_, "roomId");
    const auto device = query_param(target_, "deviceId");
    if (!room.empty() && !device.empty()) {
      endpoint_.on_frame(connection_, encode(ClientMessage{client::Join{room, device}}));
    }
    read();
  }

  void read() {
    ws_.async_read(buffer_, beast::bind_front_handler(&WebSocketSession::on_read,
                                                      shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      close();
      return;
    }
    endpoint_.on_frame(connection_, beast::buffers_to_string(buffer_.data()));
    buffer_.consume(buffer_.size());
    read();
  }

  void close() {
    if (!open_) return;
    open_ = false;
    endpoint_.on_close(connection_);
  }

  void enqueue(Frame frame) {
    if (!open_) return;
    if (outbox_.push(std::move(frame))) write();
  }

  void write() {
    auto head = outbox_.take();
    if (!head) return;
    writing_ = std::move(head->text);
    ws_.async_write(net::buffer(writing_),
                    beast::bind_front_handler(&WebSocketSession::on_write,
                                              shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    if (ec) {
      close();
      return;
    }
    if (outbox_.done()) write();
  }

  websocket::stream<beast::tcp_stream> ws_;
  ProtocolEndpoint& endpoint_;
  beast::flat_buffer buffer_;
  CoalescingOutbox outbox_;
  std::string writing_;
  ConnectionId connection_ = 0;
  bool open_ = false;
  std::string target_;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket&& socket, ProtocolEndpoint& endpoint, const Routes& routes)
      : stream_(std::move(socket)), endpoint_(endpoint), routes_(routes) {}

  void run() {
    net::dispatch(stream_.get_executor(),
                  beast::bind_front_handler(&HttpSession::read, shared_from_this()));
  }

 private:
  void read() {
    request_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, request_,
                     beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec == http::error::end_of_stream) {
      beast::error_code ignored;
      stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
      return;
    }
    if (ec) return;

    if (websocket::is_upgrade(request_) && path_of(std_view(request_.target())) == "/ws") {
      stream_.expires_never();
      std::make_shared<WebSocketSession>(stream_.release_socket(), endpoint_)
          ->run(std::move(request_));
      return;
    }
    respond();
  }

  void respond() {
    auto response = std::make_shared<http::response<http::string_body>>();
    response->version(request_.version());
    response->keep_alive(request_.keep_alive());
    response->set(http::field::server, "citywall");
    response->set(http::field::access_control_allow_origin, "*");

    const auto path = path_of(std_view(request_.target()));
    if (request_.method() != http::verb::get) {
      response->result(http::status::method_not_allowed);
      response->body() = R"({"error":"method not allowed"})";
    } else if (path == "/layout") {
      response->result(http::status::ok);
      response->body() = routes_.layout_json;
    } else if (path == "/configs") {
      response->result(http::status::ok);
      response->body() = routes_.configs_json;
    } else if (path == "/healthz") {
      response->result(http::status::ok);
      response->body() = R"({"status":"ok"})";
    } else {
      response->result(http::status::not_found);
      response->body() = R"({"error":"not found"})";
    }
    response->set(http::field::content_type, "application/json");
    response->prepare_payload();

    http::async_write(stream_, *response,
                      [self = shared_from_this(), response](beast::error_code ec,
                                                            std::size_t) {
                        if (ec) return;
                        if (!response->keep_alive()) {
                          beast::error_code ignored;
                          self->stream_.socket().shutdown(tcp::socket::shutdown_send,
                                                          ignored);
                          return;
                        }
                        self->read();
                      });
  }

  beast::tcp_stream stream_;
  ProtocolEndpoint& endpoint_;
  const Routes& routes_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> request_;
};

}  // namespace

class WebServer::Impl {
 public:
  Impl(WebServerOptions options, ProtocolEndpoint& endpoint, Routes routes)
      : options_(std::move(options)),
        endpoint_(endpoint),
        routes_(std::move(routes)),
        acceptor_(net::make_strand(ioc_)),
        signals_(ioc_) {}

  void start() {
    const tcp::endpoint where(net::ip::make_address(options_.address), options_.port);
    acceptor_.open(where.protocol());
    acceptor_.set_option(net::socket_base::reuse_address(true));
    acceptor_.bind(where);
    acceptor_.listen(net::socket_base::max_listen_connections);
    port_ = acceptor_.local_endpoint().port();
    accept();

    // Registered before any worker runs so a signal can never hit the
    // default handler once start() has returned.
    if (options_.handle_signals) {
      signals_.add(SIGINT);
      signals_.add(SIGTERM);
      signals_.async_wait([this](beast::error_code ec, int) {
        if (ec) return;
        std::lock_guard lock(mutex_);
        stopped_ = true;
        stopped_cv_.notify_all();
      });
    }

    unsigned n = options_.threads ? options_.threads : std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    for (unsigned i = 0; i < n; ++i) workers_.emplace_back([this] { ioc_.run(); });
  }

  unsigned short port() const { return port_; }

  void stop() {
    {
      std::lock_guard lock(mutex_);
      stopped_ = true;
    }
    stopped_cv_.notify_all();
    ioc_.stop();
    for (auto& t : workers_) {
      if (t.joinable() && t.get_id() != std::this_thread::get_id()) t.join();
    }
    workers_.clear();
  }

  void wait_for_shutdown_signal() {
    std::unique_lock lock(mutex_);
    stopped_cv_.wait(lock, [this] { return stopped_; });
  }

 private:
  void accept() {
    acceptor_.async_accept(net::make_strand(ioc_),
                           [this](beast::error_code ec, tcp::socket socket) {
                             if (!ec) {
                               std::make_shared<HttpSession>(std::move(socket), endpoint_,
                                                             routes_)
                                   ->run();
                             }
                             if (acceptor_.is_open()) accept();
                           });
  }

  WebServerOptions options_;
  ProtocolEndpoint& endpoint_;
  Routes routes_;
  net::io_context ioc_;
  tcp::acceptor acceptor_;
  net::signal_set signals_;
  std::vector<std::thread> workers_;
  unsigned short port_ = 0;
  std::mutex mutex_;
  std::condition_variable stopped_cv_;
  bool stopped_ = false;
};

WebServer::WebServer(WebServerOptions options, ProtocolEndpoint& endpoint,
                     std::string layout_json, std::string configs_json)
    : impl_(std::make_unique<Impl>(std::move(options), endpoint,
                                   Routes{std::move(layout_json),
                                          std::move(configs_json)})) {}

WebServer::~WebServer() { impl_->stop(); }

void WebServer::start() { impl_->start(); }
unsigned short WebServer::port() const { return impl_->port(); }
void WebServer::stop() { impl_->stop(); }
void WebServer::wait_for_shutdown_signal() { impl_->wait_for_shutdown_signal(); }

}  // namespace citywall::sync
