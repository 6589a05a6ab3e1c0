#pragma once

#include <chrono>
#include <cstddef>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "asyncdoc/channel.hpp"
#include "asyncdoc/prover.hpp"
#include "asyncdoc/session.hpp"
#include "asyncdoc/trace.hpp"

namespace asyncdoc::script {

/// One line of an edit script.
struct Step {
  enum class Kind { insert, remove, await_quiescent, query };

  Kind kind = Kind::await_quiescent;
  std::size_t offset = 0;
  std::string text;
  std::size_t length = 0;

  bool operator==(const Step&) const = default;
};

/// Line-delimited JSON, one step object per line; blank lines are skipped.
/// Throws Error(script_parse) naming the offending line.
std::vector<Step> parse_script(std::istream& in);
std::vector<Step> load_script(const std::string& path);
nlohmann::json to_json(const Step& step);

struct EngineOptions {
  prover::ProverOptions prover;
  std::string node = "foo.v";
  /// "host:port" of a remote prover; in-process when empty.
  std::optional<std::string> connect;
  /// Stream trace records here as JSON lines.
  std::ostream* trace = nullptr;
};

/// A session wired to a prover: in-process over pipes, or over TCP.
class Engine {
public:
  /// Throws Error(transport) if the remote prover cannot be reached.
  explicit Engine(EngineOptions options);
  ~Engine();

  session::Session& session() { return *session_; }
  /// Nullptr for a remote prover.
  prover::ProverEngine* prover() { return prover_.get(); }
  trace::Recorder& recorder() { return *recorder_; }

private:
  std::unique_ptr<trace::Recorder> recorder_;
  std::unique_ptr<wire::Channel> editor_channel_;
  std::unique_ptr<wire::Channel> prover_channel_;
  std::unique_ptr<prover::ProverEngine> prover_;
  std::unique_ptr<session::Session> session_;
};

/// Per-span report of a snapshot, in document order.
nlohmann::json spans_report(const session::Snapshot& snapshot);
nlohmann::json query_report(const session::Snapshot& snapshot, std::size_t offset);

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int script_error = 2;
inline constexpr int transport_error = 3;
inline constexpr int address_in_use = 4;
} // namespace exit_code

struct RunResult {
  int exit_code = exit_code::ok;
  /// {"spans": [...], "queries": [...]}
  nlohmann::json report;
  std::string error;
};

/// Executes the steps, then waits for quiescence and reports the final
/// snapshot.
RunResult run_steps(Engine& engine, const std::vector<Step>& steps,
                    std::chrono::milliseconds quiescence_timeout = std::chrono::seconds(30));

} // namespace asyncdoc::script
