#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "asyncdoc/channel.hpp"
#include "asyncdoc/document.hpp"
#include "asyncdoc/messages.hpp"
#include "asyncdoc/miniprover.hpp"
#include "asyncdoc/stm.hpp"

namespace asyncdoc::prover {

struct ProverOptions {
  std::size_t workers = stm::default_worker_count();
  /// Observe the last command of every updated node right after the update.
  bool auto_observe = true;
  miniprover::Options miniprover;
};

/// Prover side of the protocol: consumes define_command and update calls,
/// answers each update with assign_update, then feeds the execution engine.
///
/// assign_update is written before any new command reaches the STM. Feedback
/// serials are assigned under the write lock.
class ProverEngine {
public:
  ProverEngine(wire::Channel& channel, ProverOptions options = {});
  ~ProverEngine();

  ProverEngine(const ProverEngine&) = delete;
  ProverEngine& operator=(const ProverEngine&) = delete;

  /// Reads calls on a background thread until the channel closes.
  void start();
  /// Reads calls on the calling thread until the channel closes.
  void run();
  /// Closes the channel and joins the reader thread.
  void stop();

  /// Processes one call. Protocol errors are logged, not thrown.
  void handle(const wire::CommandCall& call);

  /// Waits for every STM to go idle.
  bool wait_idle(std::chrono::milliseconds timeout);

  /// Nullptr until the node has been updated once.
  stm::Stm* stm(const std::string& node);
  std::size_t executions(CommandId command) const;

private:
  void handle_update(const wire::CommandCall& call);
  void send_feedback(wire::Feedback feedback);
  stm::Stm& stm_for(const std::string& node);

  wire::Channel& channel_;
  ProverOptions options_;
  document::DocumentStore store_;

  std::mutex write_mutex_;
  std::int64_t next_serial_ = 1;

  mutable std::mutex stm_mutex_;
  std::map<std::string, std::unique_ptr<stm::Stm>> stms_;

  std::thread reader_;
};

} // namespace asyncdoc::prover
