#include "slp/ws_server.hpp"

#include <csignal>
#include <deque>
#include <mutex>
#include <thread>
#include <vector>

#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/signal_set.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "slp/error.hpp"

namespace slp {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

namespace {

class WsConnection : public std::enable_shared_from_this<WsConnection> {
 public:
  WsConnection(tcp::socket&& socket, SessionHub& hub) : ws_(std::move(socket)), hub_(hub) {}

  void run(http::request<http::string_body> req) {
    std::weak_ptr<WsConnection> weak = weak_from_this();
    auto executor = ws_.get_executor();
    handler_ = std::make_unique<ProtocolHandler>(hub_, [weak, executor](std::string frame) {
      net::post(executor, [weak, frame = std::move(frame)]() mutable {
        if (auto self = weak.lock()) self->queue(std::move(frame));
      });
    });
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, beast::bind_front_handler(&WsConnection::on_accept, shared_from_this()));
  }

  void detach() {
    if (handler_) handler_->close();
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return detach();
    read();
  }

  void read() {
    ws_.async_read(buffer_, beast::bind_front_handler(&WsConnection::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) return detach();
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    handler_->handle(text);
    read();
  }

  void queue(std::string frame) {
    outbox_.push_back(std::move(frame));
    if (outbox_.size() == 1) write();
  }

  void write() {
    ws_.text(true);
    ws_.async_write(net::buffer(outbox_.front()),
                    beast::bind_front_handler(&WsConnection::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    if (ec) {
      outbox_.clear();
      return detach();
    }
    outbox_.pop_front();
    if (!outbox_.empty()) write();
  }

  websocket::stream<beast::tcp_stream> ws_;
  SessionHub& hub_;
  beast::flat_buffer buffer_;
  std::deque<std::string> outbox_;
  std::unique_ptr<ProtocolHandler> handler_;
};

}  // namespace

struct WsServer::Impl {
  SessionHub& hub;
  net::io_context ioc{1};
  tcp::acceptor acceptor{ioc};
  net::signal_set signals{ioc};
  std::thread thread;
  std::mutex connections_mutex;
  std::vector<std::weak_ptr<WsConnection>> connections;

  explicit Impl(SessionHub& h) : hub(h) {}

  void accept() {
    acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;  // acceptor closed
      serve_http(std::make_shared<beast::tcp_stream>(std::move(socket)));
      accept();
    });
  }

  void serve_http(std::shared_ptr<beast::tcp_stream> stream) {
    auto buffer = std::make_shared<beast::flat_buffer>();
    auto req = std::make_shared<http::request<http::string_body>>();
    stream->expires_after(std::chrono::seconds(30));
    http::async_read(*stream, *buffer, *req,
                     [this, stream, buffer, req](beast::error_code ec, std::size_t) {
                       if (ec) return;
                       if (websocket::is_upgrade(*req)) {
                         stream->expires_never();
                         auto conn =
                             std::make_shared<WsConnection>(stream->release_socket(), hub);
                         {
                           std::lock_guard lock(connections_mutex);
                           std::erase_if(connections, [](auto& w) { return w.expired(); });
                           connections.push_back(conn);
                         }
                         conn->run(std::move(*req));
                         return;
                       }
                       respond(stream, *req);
                     });
  }

  void respond(const std::shared_ptr<beast::tcp_stream>& stream,
               const http::request<http::string_body>& req) {
    auto res = std::make_shared<http::response<http::string_body>>();
    res->version(req.version());
    res->keep_alive(false);
    if (req.method() == http::verb::get && req.target() == "/healthz") {
      res->result(http::status::ok);
      res->set(http::field::content_type, "text/plain");
      res->body() = "ok\n";
    } else if (req.method() == http::verb::get && req.target() == "/scenarios") {
      res->result(http::status::ok);
      res->set(http::field::content_type, "application/json");
      res->body() = Json(hub.scenario_names()).dump();
    } else {
      res->result(http::status::not_found);
      res->set(http::field::content_type, "text/plain");
      res->body() = "not found\n";
    }
    res->prepare_payload();
    http::async_write(*stream, *res, [stream, res](beast::error_code, std::size_t) {
      beast::error_code ignored;
      stream->socket().shutdown(tcp::socket::shutdown_send, ignored);
    });
  }
};

WsServer::WsServer(SessionHub& hub, const std::string& address, unsigned short port)
    : impl_(std::make_unique<Impl>(hub)) {
  const tcp::endpoint endpoint{net::ip::make_address(address), port};
  beast::error_code ec;
  impl_->acceptor.open(endpoint.protocol(), ec);
  if (!ec) impl_->acceptor.set_option(net::socket_base::reuse_address(true), ec);
  if (!ec) impl_->acceptor.bind(endpoint, ec);
  if (!ec) impl_->acceptor.listen(net::socket_base::max_listen_connections, ec);
  if (ec) throw Error("cannot listen on " + address + ":" + std::to_string(port) + ": " + ec.message());
  impl_->accept();
}

WsServer::~WsServer() { stop(); }

unsigned short WsServer::port() const { return impl_->acceptor.local_endpoint().port(); }

void WsServer::start() {
  if (impl_->thread.joinable()) return;
  impl_->thread = std::thread([this] { impl_->ioc.run(); });
}

void WsServer::run() {
  impl_->signals.add(SIGINT);
  impl_->signals.add(SIGTERM);
  impl_->signals.async_wait([this](beast::error_code ec, int) {
    if (!ec) impl_->ioc.stop();
  });
  impl_->ioc.run();
  stop();
}

void WsServer::stop() {
  impl_->ioc.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
  beast::error_code ignored;
  impl_->acceptor.close(ignored);
  std::lock_guard lock(impl_->connections_mutex);
  for (auto& weak : impl_->connections) {
    if (auto conn = weak.lock()) conn->detach();
  }
  impl_->connections.clear();
}

}  // namespace slp
