#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "asyncdoc/prover.hpp"
#include "asyncdoc/session.hpp"

namespace asyncdoc::bridge {

/// Server -> client events, one JSON object per WebSocket text frame.
///
///   {"spans":  {"version": V|null, "text": T, "spans": [span report...]}}
///   {"markup": {query report for the client's last cursor}}
///   {"trace":  {trace record}}
///   {"error":  {"message": M}}
nlohmann::json spans_event(const session::Snapshot& snapshot);
nlohmann::json markup_event(const session::Snapshot& snapshot, std::size_t offset);

struct ServeOptions {
  std::string host = "127.0.0.1";
  /// 0 picks an ephemeral port.
  std::uint16_t port = 0;
  prover::ProverOptions prover;
  std::string node = "foo.v";
  /// Plain HTTP GETs are answered from this directory.
  std::optional<std::string> static_dir;
};

/// WebSocket bridge. Every connection gets its own session and prover.
class Server {
public:
  /// Binds immediately; throws Error(address_in_use).
  explicit Server(ServeOptions options);
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  std::uint16_t port() const;
  /// Serves on the calling thread until stop().
  void run();
  /// Serves on a background thread.
  void start();
  void stop();

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

} // namespace asyncdoc::bridge
