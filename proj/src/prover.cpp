#include "asyncdoc/prover.hpp"

#include <algorithm>

#include <spdlog/spdlog.h>

#include "asyncdoc/error.hpp"
#include "asyncdoc/protocol.hpp"

namespace asyncdoc::prover {

ProverEngine::ProverEngine(wire::Channel& channel, ProverOptions options)
    : channel_(channel), options_(options) {}

ProverEngine::~ProverEngine() {
  stop();
  std::map<std::string, std::unique_ptr<stm::Stm>> stms;
  {
    std::lock_guard lock(stm_mutex_);
    stms.swap(stms_);
  }
  stms.clear();
}

void ProverEngine::start() {
  reader_ = std::thread([this] { run(); });
}

void ProverEngine::stop() {
  channel_.close();
  if (reader_.joinable() && reader_.get_id() != std::this_thread::get_id()) reader_.join();
}

void ProverEngine::run() {
  for (;;) {
    std::string chunk;
    try {
      chunk = channel_.read_chunk();
    } catch (const Error& e) {
      if (e.code() != ErrorCode::channel_closed) spdlog::error("prover: {}", e.what());
      return;
    }
    try {
      handle(wire::decode_command_call(chunk));
    } catch (const Error& e) {
      spdlog::error("prover: rejected message: {}", e.what());
    }
  }
}

void ProverEngine::handle(const wire::CommandCall& call) {
  try {
    if (call.name == protocol::define_command_name) {
      auto define = protocol::decode_define_command(call);
      store_.define_command(define.id, std::move(define.text));
    } else if (call.name == protocol::update_name) {
      handle_update(call);
    } else {
      spdlog::warn("prover: ignoring unknown command {}", call.name);
    }
  } catch (const Error& e) {
    spdlog::error("prover: {} failed: {}", call.name, e.what());
  }
}

void ProverEngine::handle_update(const wire::CommandCall& call) {
  const auto update = protocol::decode_update(call);
  auto result = store_.update(update.old_version, update.new_version, update.edits);

  const auto [header, body] =
      wire::encode_function_message(protocol::encode_assign_update({update.new_version, result.assignment}));
  {
    std::lock_guard lock(write_mutex_);
    try {
      channel_.write_chunk(header);
      channel_.write_chunk(body);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::channel_closed) {
        spdlog::debug("prover: assign_update not delivered: {}", e.what());
      } else {
        spdlog::warn("prover: assign_update not delivered: {}", e.what());
      }
    }
  }

  for (const auto& change : result.changes) {
    std::vector<stm::NewCommand> commands;
    for (const auto& entry : change.inserted) {
      commands.push_back({*entry.exec, entry.command, store_.commands().lookup(entry.command)});
    }
    auto& machine = stm_for(change.node);
    machine.insert_after(change.last_common, std::move(commands));
    if (options_.auto_observe && !change.entries.empty()) machine.observe(*change.entries.back().exec);
  }
}

void ProverEngine::send_feedback(wire::Feedback feedback) {
  std::lock_guard lock(write_mutex_);
  feedback.serial = next_serial_++;
  channel_.write_chunk(wire::encode_feedback(feedback));
}

stm::Stm& ProverEngine::stm_for(const std::string& node) {
  std::lock_guard lock(stm_mutex_);
  auto& slot = stms_[node];
  if (!slot) {
    stm::Options options{options_.workers, options_.miniprover};
    slot = std::make_unique<stm::Stm>([this](wire::Feedback f) { send_feedback(std::move(f)); }, options);
  }
  return *slot;
}

bool ProverEngine::wait_idle(std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  std::lock_guard lock(stm_mutex_);
  for (auto& [_, machine] : stms_) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (!machine->wait_idle(std::max(left, std::chrono::milliseconds(0)))) return false;
  }
  return true;
}

stm::Stm* ProverEngine::stm(const std::string& node) {
  std::lock_guard lock(stm_mutex_);
  auto it = stms_.find(node);
  return it == stms_.end() ? nullptr : it->second.get();
}

std::size_t ProverEngine::executions(CommandId command) const {
  std::lock_guard lock(stm_mutex_);
  std::size_t total = 0;
  for (const auto& [_, machine] : stms_) total += machine->executions(command);
  return total;
}

} // namespace asyncdoc::prover
