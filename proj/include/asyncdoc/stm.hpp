#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "asyncdoc/ids.hpp"
#include "asyncdoc/messages.hpp"
#include "asyncdoc/miniprover.hpp"
#include "asyncdoc/worker_pool.hpp"

namespace asyncdoc::stm {

using Clock = std::chrono::steady_clock;

enum class Status { pending, running, done, failed };

std::string_view to_string(Status status);

/// Receives feedback in emission order. Serial numbers are the sink's job.
using FeedbackSink = std::function<void(wire::Feedback)>;

/// Sink that numbers feedback with strictly increasing serials and keeps it
/// until drained.
class FeedbackQueue {
public:
  FeedbackSink sink();
  std::vector<wire::Feedback> drain();

private:
  std::mutex mutex_;
  std::int64_t next_serial_ = 1;
  std::vector<wire::Feedback> items_;
};

struct NodeView {
  ExecId exec;
  CommandId command;
  std::string text;
  miniprover::CommandShape shape = miniprover::CommandShape::plain;
  std::vector<ExecId> deps;
  Status status = Status::pending;
};

/// Statement, body and (once written) closing command of one proof.
struct ProofBranch {
  ExecId opening;
  std::vector<ExecId> body;
  std::optional<ExecId> closing;
};

struct ExecEvent {
  ExecId exec;
  CommandId command;
  Clock::time_point start;
  Clock::time_point end;
};

struct NewCommand {
  ExecId exec;
  CommandId command;
  std::string text;
};

struct Options {
  std::size_t workers = default_worker_count();
  miniprover::Options prover;
};

/// State Transaction Machine for one document node.
///
/// Commands form a spine in document order. A Lemma opens a proof branch
/// whose body and Qed depend on their predecessor inside the branch; the
/// command after the Qed depends on the Lemma (its statement), not on the
/// proof. Nothing runs until observe() demands it. Completed nodes emit
/// their feedback to the sink; a failed node fails its branch successors by
/// dependency, while spine successors run on the state before the failure.
class Stm {
public:
  explicit Stm(FeedbackSink sink, Options options = {});
  ~Stm();

  Stm(const Stm&) = delete;
  Stm& operator=(const Stm&) = delete;

  /// Drops every node after `last_common` (all nodes when none), appends
  /// `commands`, and recomputes the proof-branch structure. Starts nothing.
  /// Throws Error(unknown_anchor) if last_common is not on the spine.
  void insert_after(std::optional<ExecId> last_common, std::vector<NewCommand> commands);

  /// Schedules `target`, its dependencies, and the proof branches hanging
  /// off any statement among them. Unknown targets are ignored.
  void observe(ExecId target);

  /// Waits until no node is running or ready. False on timeout.
  bool wait_idle(std::chrono::milliseconds timeout = std::chrono::milliseconds::max());

  std::vector<ExecId> spine() const;
  std::optional<NodeView> node(ExecId exec) const;
  std::vector<ProofBranch> branches() const;
  std::vector<ExecEvent> events() const;
  /// Number of times commands with this id have been executed.
  std::size_t executions(CommandId command) const;
  std::size_t total_executions() const;
  std::size_t worker_count() const { return pool_.size(); }

private:
  struct Node {
    CommandId command;
    std::string text;
    miniprover::CommandShape shape = miniprover::CommandShape::plain;
    std::optional<ExecId> dep;
    bool env_only = false;
    bool in_branch = false;
    Status status = Status::pending;
    bool needed = false;
    std::shared_ptr<const miniprover::ProverState> output;
  };

  void rebuild_branches();
  void dispatch();
  void complete(ExecId exec, CommandId command, miniprover::Outcome outcome, Clock::time_point start,
                Clock::time_point end);
  void emit(wire::Feedback feedback);

  FeedbackSink sink_;
  Options options_;

  mutable std::mutex mutex_;
  std::condition_variable idle_;
  std::unordered_map<ExecId, Node> nodes_;
  std::vector<ExecId> spine_;
  std::vector<ProofBranch> branches_;
  std::map<ExecId, std::size_t> branch_of_opening_;
  std::vector<ExecEvent> events_;
  std::unordered_map<CommandId, std::size_t> executions_;
  std::size_t running_ = 0;
  std::atomic<bool> stopping_{false};

  // Keep last.
  WorkerPool pool_;
};

} // namespace asyncdoc::stm
