#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "tablehub/bridge.hpp"

namespace tablehub::serve {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

/// WebSocket binding for a Hub. Every handler runs on the one io_context
/// thread, which makes that thread the session's serialization point.
class Server {
 public:
  using Logger = std::function<void(const std::string&)>;

  Server(Hub& hub, const std::string& host, std::uint16_t port, Logger log = {})
      : hub_(hub), acceptor_(ioc_), log_(std::move(log)) {
    tcp::endpoint ep{net::ip::make_address(host), port};
    acceptor_.open(ep.protocol());
    acceptor_.set_option(net::socket_base::reuse_address(true));
    acceptor_.bind(ep);
    acceptor_.listen();
  }

  std::uint16_t port() const { return acceptor_.local_endpoint().port(); }

  /// Blocks until stop() is called.
  void run() {
    accept();
    ioc_.run();
  }

  /// Safe to call from any thread.
  void stop() {
    net::post(ioc_, [this] {
      beast::error_code ec;
      acceptor_.close(ec);
      for (auto& [_, c] : conns_) c->close();
      conns_.clear();
      ioc_.stop();
    });
  }

  net::io_context& context() { return ioc_; }

 private:
  class Connection : public std::enable_shared_from_this<Connection> {
   public:
    Connection(Server& server, tcp::socket socket, ConnId id)
        : server_(server), ws_(std::move(socket)), id_(id) {}

    void start() {
      ws_.text(true);
      ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
        if (ec) return self->server_.drop(self->id_);
        self->read();
      });
    }

    void send(std::string text) {
      queue_.push_back(std::move(text));
      if (queue_.size() == 1) write();
    }

    void close() {
      beast::error_code ec;
      beast::get_lowest_layer(ws_).socket().close(ec);
    }

   private:
    void read() {
      ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
        if (ec) return self->server_.drop(self->id_);
        std::string text = beast::buffers_to_string(self->buffer_.data());
        self->buffer_.consume(self->buffer_.size());
        self->server_.deliver(self->id_, text);
        self->read();
      });
    }

    void write() {
      ws_.async_write(net::buffer(queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
        if (ec) return self->server_.drop(self->id_);
        self->queue_.pop_front();
        if (!self->queue_.empty()) self->write();
      });
    }

    Server& server_;
    websocket::stream<beast::tcp_stream> ws_;
    beast::flat_buffer buffer_;
    std::deque<std::string> queue_;
    ConnId id_;
  };

  void accept() {
    acceptor_.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      ConnId id = hub_.connect();
      auto c = std::make_shared<Connection>(*this, std::move(socket), id);
      conns_[id] = c;
      log("connection " + std::to_string(id) + " opened");
      c->start();
      accept();
    });
  }

  void deliver(ConnId from, const std::string& text) {
    for (auto& o : hub_.handle_text(from, text)) {
      auto it = conns_.find(o.to);
      if (it != conns_.end()) it->second->send(encode_message(o.message));
    }
  }

  void drop(ConnId id) {
    if (conns_.erase(id)) {
      hub_.disconnect(id);
      log("connection " + std::to_string(id) + " closed");
    }
  }

  void log(const std::string& msg) {
    if (log_) log_(msg);
  }

  Hub& hub_;
  net::io_context ioc_{1};
  tcp::acceptor acceptor_;
  std::map<ConnId, std::shared_ptr<Connection>> conns_;
  Logger log_;
};

}  // namespace tablehub::serve
