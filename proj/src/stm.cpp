#include "asyncdoc/stm.hpp"

#include <algorithm>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "asyncdoc/error.hpp"

namespace asyncdoc::stm {

using miniprover::CommandShape;
using miniprover::ProverState;

std::string_view to_string(Status status) {
  switch (status) {
  case Status::pending: return "pending";
  case Status::running: return "running";
  case Status::done: return "done";
  case Status::failed: return "failed";
  }
  return "pending";
}

FeedbackSink FeedbackQueue::sink() {
  return [this](wire::Feedback f) {
    std::lock_guard lock(mutex_);
    f.serial = next_serial_++;
    items_.push_back(std::move(f));
  };
}

std::vector<wire::Feedback> FeedbackQueue::drain() {
  std::lock_guard lock(mutex_);
  return std::exchange(items_, {});
}

Stm::Stm(FeedbackSink sink, Options options)
    : sink_(std::move(sink)), options_(options), pool_(options.workers) {}

Stm::~Stm() { stopping_ = true; }

void Stm::insert_after(std::optional<ExecId> last_common, std::vector<NewCommand> commands) {
  std::lock_guard lock(mutex_);
  std::size_t keep = 0;
  if (last_common) {
    auto it = std::find(spine_.begin(), spine_.end(), *last_common);
    if (it == spine_.end()) {
      throw Error(ErrorCode::unknown_anchor, "execution " + to_string(*last_common) + " is not on the spine");
    }
    keep = static_cast<std::size_t>(std::distance(spine_.begin(), it)) + 1;
  }
  for (std::size_t i = keep; i < spine_.size(); ++i) nodes_.erase(spine_[i]);
  spine_.resize(keep);

  for (auto& c : commands) {
    Node node;
    node.command = c.command;
    node.shape = miniprover::classify(c.text);
    node.text = std::move(c.text);
    nodes_.insert_or_assign(c.exec, std::move(node));
    spine_.push_back(c.exec);
  }
  rebuild_branches();
}

void Stm::rebuild_branches() {
  branches_.clear();
  branch_of_opening_.clear();
  std::optional<std::size_t> open;
  std::optional<ExecId> provider;
  bool provider_env_only = false;
  ExecId last_in_branch;

  for (const auto exec : spine_) {
    Node& n = nodes_.at(exec);
    if (open) {
      n.dep = last_in_branch;
      n.env_only = false;
      n.in_branch = true;
      auto& branch = branches_[*open];
      if (n.shape == CommandShape::closing) {
        branch.closing = exec;
        provider = branch.opening;
        provider_env_only = true;
        open.reset();
      } else {
        branch.body.push_back(exec);
        last_in_branch = exec;
      }
      continue;
    }
    n.dep = provider;
    n.env_only = provider_env_only;
    n.in_branch = false;
    if (n.shape == CommandShape::opening) {
      open = branches_.size();
      branch_of_opening_[exec] = branches_.size();
      branches_.push_back({exec, {}, std::nullopt});
      last_in_branch = exec;
    } else {
      provider = exec;
      provider_env_only = false;
    }
  }
}

void Stm::observe(ExecId target) {
  std::lock_guard lock(mutex_);
  if (!nodes_.contains(target)) {
    spdlog::warn("stm: observe of unknown execution {}", target.value);
    return;
  }
  std::vector<ExecId> work{target};
  std::unordered_set<ExecId> seen;
  while (!work.empty()) {
    const ExecId e = work.back();
    work.pop_back();
    if (!seen.insert(e).second) continue;
    Node& n = nodes_.at(e);
    n.needed = true;
    if (n.dep) work.push_back(*n.dep);
    if (auto it = branch_of_opening_.find(e); it != branch_of_opening_.end()) {
      const auto& branch = branches_[it->second];
      work.insert(work.end(), branch.body.begin(), branch.body.end());
      if (branch.closing) work.push_back(*branch.closing);
    }
  }
  dispatch();
}

void Stm::emit(wire::Feedback feedback) {
  try {
    sink_(std::move(feedback));
  } catch (const std::exception& e) {
    spdlog::debug("stm: dropping feedback: {}", e.what());
  }
}

void Stm::dispatch() {
  bool progress = true;
  while (progress) {
    progress = false;
    for (const auto exec : spine_) {
      Node& n = nodes_.at(exec);
      if (!n.needed || n.status != Status::pending) continue;

      std::shared_ptr<const ProverState> input;
      if (n.dep) {
        const Node& d = nodes_.at(*n.dep);
        if (d.status == Status::pending || d.status == Status::running) continue;
        if (d.status == Status::failed && n.in_branch) {
          n.status = Status::failed;
          emit(wire::make_text_feedback(wire::FeedbackKind::error, exec,
                                        "Error: Not executed: depends on failed execution " +
                                            to_string(*n.dep)));
          progress = true;
          continue;
        }
        input = d.output;
        if (n.env_only && input && input->proof) {
          auto closed = std::make_shared<ProverState>(*input);
          closed->proof.reset();
          input = std::move(closed);
        }
      }
      if (!input) input = std::make_shared<const ProverState>();

      n.status = Status::running;
      ++running_;
      pool_.submit([this, exec, command = n.command, text = n.text, input = std::move(input)] {
        if (stopping_) {
          std::lock_guard lock(mutex_);
          --running_;
          idle_.notify_all();
          return;
        }
        const auto start = Clock::now();
        auto outcome = miniprover::exec_command(*input, text, exec, options_.prover);
        complete(exec, command, std::move(outcome), start, Clock::now());
      });
    }
  }
}

void Stm::complete(ExecId exec, CommandId command, miniprover::Outcome outcome, Clock::time_point start,
                   Clock::time_point end) {
  std::lock_guard lock(mutex_);
  --running_;
  ++executions_[command];
  auto it = nodes_.find(exec);
  if (it != nodes_.end() && it->second.status == Status::running) {
    Node& n = it->second;
    events_.push_back({exec, command, start, end});
    n.output = std::make_shared<const ProverState>(std::move(outcome.state));
    n.status = outcome.ok ? Status::done : Status::failed;
    for (auto& f : outcome.feedback) emit(std::move(f));
    dispatch();
  }
  idle_.notify_all();
}

bool Stm::wait_idle(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mutex_);
  auto idle = [&] { return running_ == 0; };
  if (timeout == std::chrono::milliseconds::max()) {
    idle_.wait(lock, idle);
    return true;
  }
  return idle_.wait_for(lock, timeout, idle);
}

std::vector<ExecId> Stm::spine() const {
  std::lock_guard lock(mutex_);
  return spine_;
}

std::optional<NodeView> Stm::node(ExecId exec) const {
  std::lock_guard lock(mutex_);
  auto it = nodes_.find(exec);
  if (it == nodes_.end()) return std::nullopt;
  const Node& n = it->second;
  NodeView v{exec, n.command, n.text, n.shape, {}, n.status};
  if (n.dep) v.deps.push_back(*n.dep);
  return v;
}

std::vector<ProofBranch> Stm::branches() const {
  std::lock_guard lock(mutex_);
  return branches_;
}

std::vector<ExecEvent> Stm::events() const {
  std::lock_guard lock(mutex_);
  return events_;
}

std::size_t Stm::executions(CommandId command) const {
  std::lock_guard lock(mutex_);
  auto it = executions_.find(command);
  return it == executions_.end() ? 0 : it->second;
}

std::size_t Stm::total_executions() const {
  std::lock_guard lock(mutex_);
  std::size_t total = 0;
  for (const auto& [_, n] : executions_) total += n;
  return total;
}

} // namespace asyncdoc::stm
