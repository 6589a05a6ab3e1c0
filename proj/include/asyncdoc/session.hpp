#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "asyncdoc/channel.hpp"
#include "asyncdoc/ids.hpp"
#include "asyncdoc/messages.hpp"
#include "asyncdoc/protocol.hpp"
#include "asyncdoc/span_parser.hpp"

namespace asyncdoc::session {

enum class SpanStatus { pending, done, failed };

std::string_view to_string(SpanStatus status);

/// Half-open range of absolute buffer offsets.
struct Region {
  std::size_t start = 0;
  std::size_t end = 0;

  bool operator==(const Region&) const = default;
};

struct SpanInfo {
  CommandId id;
  std::string text;
  Region region;
  std::optional<ExecId> exec;
  SpanStatus status = SpanStatus::pending;
};

struct ErrorMark {
  Region region;
  std::string message;
};

/// Hyperlink from a use of a name to its definition.
struct Link {
  Region use;
  std::string name;
  std::string kind;
  ExecId def_exec;
  /// Definition offsets relative to the defining command, as reported.
  std::int64_t def_offset = 0;
  std::int64_t def_end_offset = 0;
  /// The defining span, when it is part of this snapshot.
  std::optional<CommandId> target_command;
  std::optional<Region> target;
};

struct QueryResult {
  std::optional<std::string> state_text;
  std::vector<ErrorMark> errors;
  std::vector<Link> links;
};

/// Immutable view of the buffer and the markup of the latest confirmed
/// document version. Markup is only visible through confirmed assignments.
class Snapshot {
public:
  std::optional<VersionId> version;
  std::string text;
  std::vector<SpanInfo> spans;
  std::unordered_map<ExecId, std::vector<wire::Feedback>> markup;

  /// Span containing `cursor`; the last span when cursor is at end of text.
  std::optional<std::size_t> span_at(std::size_t cursor) const;

  QueryResult query(std::size_t cursor) const;
  QueryResult query_span(std::size_t index) const;

  /// Feedback of one span in arrival order.
  const std::vector<wire::Feedback>& feedback_of(std::size_t index) const;
};

using SnapshotPtr = std::shared_ptr<const Snapshot>;

struct SessionOptions {
  std::string node = "foo.v";
  /// Defaults to the period-terminated parser.
  std::shared_ptr<const spans::LanguageParser> parser;
};

/// Editor side of the protocol for one buffer.
///
/// edit_buffer turns text edits into define_command and update calls;
/// inbound assign_update and feedback (processed by the reader thread, or
/// fed directly through receive) build up the markup behind snapshot().
class Session {
public:
  explicit Session(wire::Channel& channel, SessionOptions options = {});
  ~Session();

  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  /// Reads inbound messages on a background thread.
  void start();
  /// Closes the channel and joins the reader.
  void stop();

  /// Applies `edits` in order, then sends one batch of protocol messages.
  /// Throws Error(out_of_bounds) without changing anything if an edit does
  /// not fit.
  void edit_buffer(const std::vector<spans::TextEdit>& edits);

  void receive(wire::Inbound message);
  /// Unknown versions are logged and ignored; repeated ones are idempotent.
  void handle_assign(const protocol::AssignUpdate& assign);
  void accumulate(wire::Feedback feedback);

  SnapshotPtr snapshot() const;
  QueryResult query(std::size_t cursor) const { return snapshot()->query(cursor); }

  /// Every sent version confirmed and every assigned execution reported a
  /// final writeln or error.
  bool quiescent() const;
  /// False on timeout or when the channel closed first.
  bool await_quiescent(std::chrono::milliseconds timeout);

  std::string text() const;
  std::vector<spans::CommandSpan> spans() const;
  /// Number of feedback items held in the markup store.
  std::size_t markup_size() const;
  /// Versions sent but not yet confirmed.
  std::size_t pending_versions() const;
  /// True once the reader saw the channel close or fail.
  bool disconnected() const;

  /// Called (outside the session lock) after any change visible in snapshots.
  void set_listener(std::function<void()> listener);

private:
  using AssignmentMap = std::unordered_map<CommandId, ExecId>;

  void reader_loop();
  bool quiescent_locked() const;
  void changed(std::unique_lock<std::mutex>& lock);

  wire::Channel& channel_;
  SessionOptions options_;

  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::string text_;
  std::vector<spans::CommandSpan> spans_;
  std::int64_t next_id_ = -1;
  VersionId current_version_{0};
  std::deque<VersionId> pending_;
  std::optional<VersionId> confirmed_;
  AssignmentMap assignment_;
  AssignmentMap previous_assignment_;
  std::unordered_map<ExecId, std::vector<wire::Feedback>> markup_;
  std::unordered_set<ExecId> finished_;
  bool disconnected_ = false;
  mutable SnapshotPtr snapshot_;
  std::function<void()> listener_;

  std::mutex write_mutex_;
  std::thread reader_;
};

} // namespace asyncdoc::session
