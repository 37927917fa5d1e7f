#include <thread>

#include <boost/asio/connect.hpp>
#include <gtest/gtest.h>

#include "serve.hpp"

using namespace tablehub;
namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

namespace {

class Client {
 public:
  explicit Client(std::uint16_t port) : ws_(ioc_) {
    tcp::resolver resolver(ioc_);
    net::connect(ws_.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
    ws_.handshake("127.0.0.1", "/");
    ws_.text(true);
  }

  void send(const std::string& text) { ws_.write(net::buffer(text)); }

  BridgeMessage receive() {
    beast::flat_buffer buf;
    ws_.read(buf);
    return decode_message(beast::buffers_to_string(buf.data()));
  }

  void close() { ws_.close(websocket::close_code::normal); }

 private:
  net::io_context ioc_;
  websocket::stream<tcp::socket> ws_;
};

std::string msg(std::uint64_t id, std::string_view kind, std::string_view payload) {
  return R"({"protocol":"dsbp","version":1,"id":)" + std::to_string(id) + R"(,"kind":")" + std::string(kind) +
         R"(","payload":)" + std::string(payload) + "}";
}

}  // namespace

TEST(Serve, WebSocketRoundTrip) {
  Session session;
  session.load_dataset("sales", read_delimited("region,sales\nN,1\nS,2\n"));
  Hub hub(session, "demo");
  serve::Server server(hub, "127.0.0.1", 0);
  std::thread loop([&] { server.run(); });

  {
    Client editor(server.port());
    Client viewer(server.port());

    editor.send(msg(1, "hello", R"({"tool_id":"editor","accepts":["csv"],"features":["edits"]})"));
    auto welcome = editor.receive();
    EXPECT_EQ(welcome.kind, MessageKind::Welcome);
    EXPECT_EQ(welcome.reply_to, 1u);
    EXPECT_EQ(welcome.payload["session_name"], "demo");
    EXPECT_EQ(welcome.payload["negotiated_format"], "csv");

    viewer.send(msg(1, "hello", R"({"tool_id":"viewer","accepts":["column_map"]})"));
    EXPECT_EQ(viewer.receive().kind, MessageKind::Welcome);
    viewer.send(msg(2, "request_data", R"({"dataset_id":"ds1"})"));
    auto data = viewer.receive();
    EXPECT_EQ(data.kind, MessageKind::Data);
    EXPECT_EQ(write_json(data.payload["payload"]), R"({"region":["N","S"],"sales":[1,2]})");

    editor.send(msg(2, "apply_edits", R"({"dataset_id":"ds1","steps":[{"op":"filter","pred":"sales > 1"}]})"));
    auto applied = editor.receive();
    EXPECT_EQ(applied.kind, MessageKind::EditsApplied);
    EXPECT_EQ(applied.payload["revision"], 1);
    auto changed = viewer.receive();
    EXPECT_EQ(changed.kind, MessageKind::DatasetChanged);
    EXPECT_FALSE(changed.reply_to.has_value());

    viewer.send(msg(3, "request_data", R"({"dataset_id":"ds1"})"));
    EXPECT_EQ(write_json(viewer.receive().payload["payload"]), R"({"region":["S"],"sales":[2]})");

    editor.send("garbage");
    auto err = editor.receive();
    EXPECT_EQ(err.kind, MessageKind::Error);
    EXPECT_EQ(err.payload["code"], "MalformedMessage");

    viewer.close();
    editor.send(msg(3, "apply_edits", R"({"dataset_id":"ds1","steps":[{"op":"derive","name":"x","expr":"sales"}]})"));
    EXPECT_EQ(editor.receive().kind, MessageKind::EditsApplied);
    editor.close();
  }

  server.stop();
  loop.join();
  EXPECT_EQ(session.dataset("ds1").revision, 2u);
}

TEST(Serve, StopWithOpenConnections) {
  Session session;
  Hub hub(session);
  serve::Server server(hub, "127.0.0.1", 0);
  std::thread loop([&] { server.run(); });
  Client c(server.port());
  c.send(msg(1, "hello", R"({"tool_id":"t","accepts":["csv"]})"));
  EXPECT_EQ(c.receive().kind, MessageKind::Welcome);
  server.stop();
  loop.join();
  SUCCEED();
}
