#include <filesystem>
#include <fstream>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <gtest/gtest.h>

#include "asyncdoc/bridge.hpp"
#include "asyncdoc/error.hpp"
#include "support.hpp"

using namespace asyncdoc;
using nlohmann::json;

namespace net = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

namespace {

const std::string incomplete_proof_text =
    "Lemma app_assoc : 1 + 1 = 2.\nProof.\n  idtac.\nQed.\nLemma use : 2 = 2.\nProof.\n  Check app_assoc.\n"
    "  reflexivity.\nQed.\n";

class Client {
public:
  explicit Client(std::uint16_t port) : ws_(ioc_) {
    tcp::resolver resolver(ioc_);
    net::connect(ws_.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
    ws_.handshake("127.0.0.1", "/");
  }

  ~Client() {
    beast::error_code ignored;
    ws_.close(websocket::close_code::normal, ignored);
  }

  void send(const json& frame) { ws_.write(net::buffer(frame.dump())); }

  json next() {
    beast::flat_buffer buffer;
    ws_.read(buffer);
    return json::parse(beast::buffers_to_string(buffer.data()));
  }

  /// Reads until an event with `key` arrives, keeping the others.
  json next_of(const std::string& key) {
    for (;;) {
      auto event = next();
      if (event.contains(key)) return event.at(key);
      seen_.push_back(std::move(event));
    }
  }

  /// Reads spans events until every span has a final status.
  json settled() {
    for (;;) {
      auto spans = next_of("spans");
      bool done = !spans.at("spans").empty();
      for (const auto& s : spans.at("spans")) done = done && s.at("status") != "pending";
      if (done) return spans;
    }
  }

  const std::vector<json>& seen() const { return seen_; }

private:
  net::io_context ioc_;
  websocket::stream<tcp::socket> ws_;
  std::vector<json> seen_;
};

bridge::ServeOptions options() {
  bridge::ServeOptions o;
  o.prover.workers = 1;
  return o;
}

json insert(std::size_t offset, const std::string& text) {
  return {{"edit", json::array({{{"insert", {{"offset", offset}, {"text", text}}}}})}};
}

} // namespace

TEST(Bridge, EditQueryAndTrace) {
  bridge::Server server(options());
  server.start();
  Client client(server.port());

  const auto initial = client.next_of("spans");
  EXPECT_EQ(initial.at("text"), "");
  EXPECT_TRUE(initial.at("spans").empty());
  EXPECT_TRUE(initial.at("version").is_null());

  client.send(insert(0, incomplete_proof_text));
  const auto spans = client.settled();
  EXPECT_EQ(spans.at("text"), incomplete_proof_text);
  ASSERT_EQ(spans.at("spans").size(), 9u);
  EXPECT_EQ(spans.at("spans")[3].at("status"), "failed");
  EXPECT_FALSE(spans.at("version").is_null());

  const auto cursor = incomplete_proof_text.find("Check app_assoc") + 6;
  client.send({{"query", {{"offset", cursor}}}});
  const auto markup = client.next_of("markup");
  EXPECT_EQ(markup.at("span"), 6);
  EXPECT_EQ(markup.at("state"), "app_assoc : 1 + 1 = 2");
  EXPECT_EQ(markup.at("links").at(0).at("target"), (json{{"start", 6}, {"end", 15}}));

  client.send({{"trace", {{"enabled", true}}}});
  client.send({{"edit", json::array({{{"remove", {{"offset", 0}, {"length", 0}}}}})}});
  client.send(insert(incomplete_proof_text.size(), "Check use.\n"));
  const auto record = client.next_of("trace");
  EXPECT_EQ(record.at("dir"), "out");
  EXPECT_TRUE(record.contains("xml"));
  const auto after = client.settled();
  EXPECT_EQ(after.at("spans").size(), 10u);

  client.send({{"bogus", 1}});
  EXPECT_EQ(client.next_of("error").at("message"), "unknown frame");
  client.send(insert(9999, "x"));
  EXPECT_FALSE(client.next_of("error").at("message").get<std::string>().empty());
  client.send(json("not an object"));
  client.next_of("error");
}

TEST(Bridge, ConnectionsAreIsolated) {
  bridge::Server server(options());
  server.start();
  Client a(server.port());
  Client b(server.port());
  a.next_of("spans");
  b.next_of("spans");

  a.send(insert(0, "Definition x := 1.\n"));
  a.settled();
  b.send({{"query", {{"offset", 0}}}});
  const auto event = b.next();
  ASSERT_TRUE(event.contains("markup")) << event.dump();
  EXPECT_TRUE(event.at("markup").at("span").is_null());
}

TEST(Bridge, StaticFilesAndNotFound) {
  const std::string dir = ::testing::TempDir() + "asyncdoc_static";
  std::filesystem::create_directories(dir);
  std::ofstream(dir + "/index.html") << "<html>hi</html>";
  auto o = options();
  o.static_dir = dir;
  bridge::Server server(o);
  server.start();

  auto get = [&](const std::string& target) {
    net::io_context ioc;
    beast::tcp_stream stream(ioc);
    tcp::resolver resolver(ioc);
    stream.connect(resolver.resolve("127.0.0.1", std::to_string(server.port())));
    http::request<http::empty_body> request{http::verb::get, target, 11};
    request.set(http::field::host, "127.0.0.1");
    http::write(stream, request);
    beast::flat_buffer buffer;
    http::response<http::string_body> response;
    http::read(stream, buffer, response);
    return response;
  };
  const auto index = get("/");
  EXPECT_EQ(index.result(), http::status::ok);
  EXPECT_EQ(index.body(), "<html>hi</html>");
  EXPECT_EQ(index[http::field::content_type], "text/html");
  EXPECT_EQ(get("/missing.js").result(), http::status::not_found);
  EXPECT_EQ(get("/../etc/passwd").result(), http::status::not_found);
}

TEST(Bridge, PortInUse) {
  bridge::Server first(options());
  auto o = options();
  o.port = first.port();
  try {
    bridge::Server second(o);
    FAIL() << "expected address in use";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::address_in_use);
  }
}
