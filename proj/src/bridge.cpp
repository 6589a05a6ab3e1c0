#include "asyncdoc/bridge.hpp"

#include <atomic>
#include <deque>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <spdlog/spdlog.h>

#include "asyncdoc/error.hpp"
#include "asyncdoc/script.hpp"

namespace asyncdoc::bridge {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;
using nlohmann::json;

json spans_event(const session::Snapshot& snapshot) {
  return {{"spans",
           {{"version", snapshot.version ? json(snapshot.version->value) : json(nullptr)},
            {"text", snapshot.text},
            {"spans", script::spans_report(snapshot)}}}};
}

json markup_event(const session::Snapshot& snapshot, std::size_t offset) {
  return {{"markup", script::query_report(snapshot, std::min(offset, snapshot.text.size()))}};
}

namespace {

std::string mime_type(const std::string& path) {
  auto ends = [&](std::string_view ext) { return path.size() >= ext.size() && path.ends_with(ext); };
  if (ends(".html")) return "text/html";
  if (ends(".js")) return "application/javascript";
  if (ends(".css")) return "text/css";
  if (ends(".json")) return "application/json";
  return "application/octet-stream";
}

std::vector<spans::TextEdit> parse_edits(const json& value) {
  if (!value.is_array()) throw Error(ErrorCode::invalid_edit, "edit must be an array");
  std::vector<spans::TextEdit> edits;
  for (const auto& item : value) {
    if (item.contains("insert")) {
      const auto& b = item.at("insert");
      edits.push_back(spans::TextEdit::insert(b.at("offset").get<std::size_t>(), b.at("text").get<std::string>()));
    } else if (item.contains("remove")) {
      const auto& b = item.at("remove");
      edits.push_back(spans::TextEdit::remove(b.at("offset").get<std::size_t>(), b.at("length").get<std::size_t>()));
    } else {
      throw Error(ErrorCode::invalid_edit, "unknown edit " + item.dump());
    }
  }
  return edits;
}

class Connection : public std::enable_shared_from_this<Connection> {
public:
  Connection(tcp::socket socket, const ServeOptions& options)
      : options_(options), ws_(std::move(socket)) {}

  ~Connection() { close_engine(); }

  void start() {
    http::async_read(ws_.next_layer(), buffer_, request_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_request(ec); });
  }

  void close_engine() {
    std::unique_ptr<script::Engine> engine;
    {
      std::lock_guard lock(engine_mutex_);
      engine = std::move(engine_);
    }
    if (!engine) return;
    engine->session().set_listener(nullptr);
    engine->recorder().set_listener(nullptr);
    engine.reset();
  }

private:
  void on_request(beast::error_code ec) {
    if (ec) return;
    if (websocket::is_upgrade(request_)) {
      ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
      ws_.async_accept(request_, [self = shared_from_this()](beast::error_code ec) { self->on_accept(ec); });
      return;
    }
    serve_file();
  }

  void serve_file() {
    auto response = std::make_shared<http::response<http::string_body>>();
    response->version(request_.version());
    response->keep_alive(false);
    std::string target(request_.target());
    if (target == "/") target = "/index.html";
    std::string body;
    bool found = false;
    if (options_.static_dir && target.find("..") == std::string::npos) {
      std::ifstream in(*options_.static_dir + target, std::ios::binary);
      if (in) {
        std::ostringstream content;
        content << in.rdbuf();
        body = content.str();
        found = true;
      }
    }
    response->result(found ? http::status::ok : http::status::not_found);
    response->set(http::field::content_type, found ? mime_type(target) : "text/plain");
    response->body() = found ? body : "not found\n";
    response->prepare_payload();
    http::async_write(ws_.next_layer(), *response,
                      [self = shared_from_this(), response](beast::error_code, std::size_t) {
                        beast::error_code ignored;
                        beast::get_lowest_layer(self->ws_).socket().shutdown(tcp::socket::shutdown_send, ignored);
                      });
  }

  void on_accept(beast::error_code ec) {
    if (ec) return;
    ws_.text(true);
    try {
      script::EngineOptions engine_options;
      engine_options.prover = options_.prover;
      engine_options.node = options_.node;
      auto engine = std::make_unique<script::Engine>(engine_options);
      std::weak_ptr<Connection> weak = shared_from_this();
      engine->session().set_listener([weak] {
        if (auto self = weak.lock()) self->schedule_refresh();
      });
      engine->recorder().set_listener([weak](const trace::Record& record) {
        if (auto self = weak.lock()) self->on_trace(record);
      });
      std::lock_guard lock(engine_mutex_);
      engine_ = std::move(engine);
    } catch (const Error& e) {
      spdlog::error("bridge: cannot start engine: {}", e.what());
      return;
    }
    send(spans_event(*snapshot()));
    read();
  }

  session::SnapshotPtr snapshot() {
    std::lock_guard lock(engine_mutex_);
    return engine_ ? engine_->session().snapshot() : std::make_shared<const session::Snapshot>();
  }

  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->close_engine();
        return;
      }
      const std::string frame = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      self->on_frame(frame);
      self->read();
    });
  }

  void on_frame(const std::string& frame) {
    try {
      const auto value = json::parse(frame);
      if (value.contains("edit")) {
        const auto edits = parse_edits(value.at("edit"));
        std::lock_guard lock(engine_mutex_);
        if (engine_) engine_->session().edit_buffer(edits);
      } else if (value.contains("query")) {
        cursor_ = value.at("query").at("offset").get<std::size_t>();
        send(markup_event(*snapshot(), *cursor_));
      } else if (value.contains("trace")) {
        trace_enabled_ = value.at("trace").value("enabled", false);
      } else {
        send_error("unknown frame");
      }
    } catch (const std::exception& e) {
      send_error(e.what());
    }
  }

  void send_error(const std::string& message) { send({{"error", {{"message", message}}}}); }

  /// From the session thread: coalesce snapshot pushes onto the strand.
  void schedule_refresh() {
    if (refresh_pending_.exchange(true)) return;
    net::post(ws_.get_executor(), [self = shared_from_this()] {
      self->refresh_pending_ = false;
      const auto snap = self->snapshot();
      self->send(spans_event(*snap));
      if (self->cursor_) self->send(markup_event(*snap, *self->cursor_));
    });
  }

  void on_trace(const trace::Record& record) {
    net::post(ws_.get_executor(), [self = shared_from_this(), line = trace::to_json(record)] {
      if (self->trace_enabled_) self->send({{"trace", line}});
    });
  }

  void send(const json& event) {
    outbox_.push_back(event.dump(-1, ' ', false, json::error_handler_t::replace));
    if (outbox_.size() == 1) write_next();
  }

  void write_next() {
    ws_.async_write(net::buffer(outbox_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->outbox_.clear();
        return;
      }
      self->outbox_.pop_front();
      if (!self->outbox_.empty()) self->write_next();
    });
  }

  const ServeOptions& options_;
  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> request_;
  std::mutex engine_mutex_;
  std::unique_ptr<script::Engine> engine_;
  std::deque<std::string> outbox_;
  std::optional<std::size_t> cursor_;
  bool trace_enabled_ = false;
  std::atomic<bool> refresh_pending_{false};
};

} // namespace

struct Server::Impl {
  ServeOptions options;
  net::io_context ioc{1};
  tcp::acceptor acceptor{ioc};
  std::thread thread;
  std::mutex mutex;
  std::vector<std::weak_ptr<Connection>> connections;

  void accept() {
    acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      auto connection = std::make_shared<Connection>(std::move(socket), options);
      {
        std::lock_guard lock(mutex);
        std::erase_if(connections, [](const auto& c) { return c.expired(); });
        connections.push_back(connection);
      }
      connection->start();
      accept();
    });
  }
};

Server::Server(ServeOptions options) : impl_(std::make_unique<Impl>()) {
  impl_->options = std::move(options);
  beast::error_code ec;
  const tcp::endpoint endpoint(net::ip::make_address(impl_->options.host, ec), impl_->options.port);
  if (ec) throw Error(ErrorCode::transport, "bad host " + impl_->options.host);
  impl_->acceptor.open(endpoint.protocol());
  impl_->acceptor.set_option(net::socket_base::reuse_address(true));
  impl_->acceptor.bind(endpoint, ec);
  if (ec) {
    throw Error(ec == net::error::address_in_use ? ErrorCode::address_in_use : ErrorCode::transport,
                "cannot bind port " + std::to_string(impl_->options.port) + ": " + ec.message());
  }
  impl_->acceptor.listen();
  impl_->accept();
}

Server::~Server() { stop(); }

std::uint16_t Server::port() const { return impl_->acceptor.local_endpoint().port(); }

void Server::run() { impl_->ioc.run(); }

void Server::start() {
  impl_->thread = std::thread([this] { run(); });
}

void Server::stop() {
  std::vector<std::shared_ptr<Connection>> live;
  {
    std::lock_guard lock(impl_->mutex);
    for (auto& weak : impl_->connections) {
      if (auto c = weak.lock()) live.push_back(std::move(c));
    }
    impl_->connections.clear();
  }
  for (auto& c : live) c->close_engine();
  live.clear();
  impl_->ioc.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

} // namespace asyncdoc::bridge
