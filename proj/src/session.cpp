#include "asyncdoc/session.hpp"

#include <algorithm>

#include <spdlog/spdlog.h>

#include "asyncdoc/error.hpp"

namespace asyncdoc::session {

std::string_view to_string(SpanStatus status) {
  switch (status) {
  case SpanStatus::pending: return "pending";
  case SpanStatus::done: return "done";
  case SpanStatus::failed: return "failed";
  }
  return "pending";
}

namespace {

const std::vector<wire::Feedback> no_feedback;

bool terminal(const wire::Feedback& f) { return f.kind != wire::FeedbackKind::report; }

/// Command-relative 1-based offsets to an absolute region, clipped to the span.
Region absolute(const Region& span, std::int64_t offset, std::int64_t end_offset) {
  const auto length = static_cast<std::int64_t>(span.end - span.start);
  const auto clip = [&](std::int64_t v) { return span.start + static_cast<std::size_t>(std::clamp<std::int64_t>(v, 0, length)); };
  const std::size_t start = clip(offset - 1);
  return {start, std::max(start, clip(end_offset - 1))};
}

} // namespace

std::optional<std::size_t> Snapshot::span_at(std::size_t cursor) const {
  if (spans.empty()) return std::nullopt;
  auto it = std::upper_bound(spans.begin(), spans.end(), cursor,
                             [](std::size_t c, const SpanInfo& s) { return c < s.region.start; });
  if (it == spans.begin()) return 0;
  return static_cast<std::size_t>(std::distance(spans.begin(), it)) - 1;
}

const std::vector<wire::Feedback>& Snapshot::feedback_of(std::size_t index) const {
  const auto& span = spans.at(index);
  if (!span.exec) return no_feedback;
  auto it = markup.find(*span.exec);
  return it == markup.end() ? no_feedback : it->second;
}

QueryResult Snapshot::query(std::size_t cursor) const {
  const auto index = span_at(cursor);
  if (!index) return {};
  return query_span(*index);
}

QueryResult Snapshot::query_span(std::size_t index) const {
  QueryResult result;
  const auto& span = spans.at(index);
  std::int64_t state_serial = -1;
  for (const auto& f : feedback_of(index)) {
    switch (f.kind) {
    case wire::FeedbackKind::writeln:
      if (f.serial >= state_serial) {
        state_serial = f.serial;
        result.state_text = f.text();
      }
      break;
    case wire::FeedbackKind::error: {
      Region region = span.region;
      if (f.offset && f.end_offset) region = absolute(span.region, *f.offset, *f.end_offset);
      result.errors.push_back({region, f.text()});
      break;
    }
    case wire::FeedbackKind::report:
      for (const auto& e : wire::entities_of(f)) {
        Link link;
        link.use = absolute(span.region, e.offset, e.end_offset);
        link.name = e.name;
        link.kind = e.kind;
        link.def_exec = e.def_id;
        link.def_offset = e.def_offset;
        link.def_end_offset = e.def_end_offset;
        for (const auto& target : spans) {
          if (target.exec == e.def_id) {
            link.target_command = target.id;
            link.target = absolute(target.region, e.def_offset, e.def_end_offset);
            break;
          }
        }
        result.links.push_back(std::move(link));
      }
      break;
    }
  }
  return result;
}

Session::Session(wire::Channel& channel, SessionOptions options)
    : channel_(channel), options_(std::move(options)) {
  if (!options_.parser) options_.parser = std::make_shared<spans::PeriodParser>();
}

Session::~Session() { stop(); }

void Session::start() {
  reader_ = std::thread([this] { reader_loop(); });
}

void Session::stop() {
  channel_.close();
  if (reader_.joinable()) reader_.join();
}

void Session::reader_loop() {
  for (;;) {
    try {
      receive(wire::read_inbound(channel_));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::channel_closed) break;
      if (e.code() == ErrorCode::malformed_frame) {
        spdlog::error("session: {}", e.what());
        break;
      }
      spdlog::error("session: dropping inbound message: {}", e.what());
    }
  }
  std::unique_lock lock(mutex_);
  disconnected_ = true;
  changed(lock);
}

void Session::set_listener(std::function<void()> listener) {
  std::lock_guard lock(mutex_);
  listener_ = std::move(listener);
}

void Session::changed(std::unique_lock<std::mutex>& lock) {
  snapshot_.reset();
  auto listener = listener_;
  lock.unlock();
  cv_.notify_all();
  if (listener) listener();
}

void Session::edit_buffer(const std::vector<spans::TextEdit>& edits) {
  if (edits.empty()) return;
  const auto& parser = *options_.parser;

  std::lock_guard write(write_mutex_);
  std::unique_lock lock(mutex_);
  std::string text = text_;
  auto spans = spans_;
  for (const auto& edit : edits) {
    spans::check_bounds(text, edit);
    spans = spans::reparse(parser, text, spans, edit).spans;
    spans::apply_edit(text, edit);
  }

  std::vector<protocol::DefineCommand> defines;
  for (auto& span : spans) {
    if (span.id.value != 0) continue;
    span.id = CommandId(next_id_--);
    defines.push_back({span.id, span.text});
  }

  std::unordered_set<CommandId> old_ids;
  std::unordered_set<CommandId> new_ids;
  for (const auto& s : spans_) old_ids.insert(s.id);
  for (const auto& s : spans) new_ids.insert(s.id);

  std::vector<EditOp> ops;
  std::optional<CommandId> anchor;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < spans_.size() || j < spans.size()) {
    if (i < spans_.size() && !new_ids.contains(spans_[i].id)) {
      ops.push_back(EditOp::remove(anchor));
      ++i;
    } else if (j < spans.size() && !old_ids.contains(spans[j].id)) {
      ops.push_back(EditOp::insert(anchor, spans[j].id));
      anchor = spans[j].id;
      ++j;
    } else {
      anchor = spans[j].id;
      ++i;
      ++j;
    }
  }

  text_ = std::move(text);
  spans_ = std::move(spans);
  if (ops.empty()) {
    changed(lock);
    return;
  }

  const protocol::Update update{current_version_, VersionId(next_id_--), {{options_.node, std::move(ops)}}};
  current_version_ = update.new_version;
  pending_.push_back(update.new_version);
  changed(lock);

  for (const auto& define : defines) {
    channel_.write_chunk(wire::encode_command_call(protocol::encode_define_command(define)));
  }
  channel_.write_chunk(wire::encode_command_call(protocol::encode_update(update)));
}

void Session::receive(wire::Inbound message) {
  if (auto* feedback = std::get_if<wire::Feedback>(&message)) {
    accumulate(std::move(*feedback));
    return;
  }
  const auto& function = std::get<wire::FunctionMessage>(message);
  if (function.function == protocol::assign_update_name) {
    handle_assign(protocol::decode_assign_update(function));
  } else {
    spdlog::warn("session: ignoring function {}", function.function);
  }
}

void Session::handle_assign(const protocol::AssignUpdate& assign) {
  std::unique_lock lock(mutex_);
  auto it = std::find(pending_.begin(), pending_.end(), assign.version);
  if (it == pending_.end()) {
    if (confirmed_ != assign.version) {
      spdlog::warn("session: assignment for unknown version {}", assign.version.value);
    }
    return;
  }
  pending_.erase(pending_.begin(), std::next(it));
  confirmed_ = assign.version;

  previous_assignment_ = std::move(assignment_);
  assignment_.clear();
  for (const auto& entry : assign.assignment) {
    if (entry.execs.empty()) continue;
    assignment_[entry.command] = entry.execs.front();
  }

  std::unordered_set<ExecId> live;
  for (const auto& [_, exec] : assignment_) live.insert(exec);
  for (const auto& [_, exec] : previous_assignment_) live.insert(exec);
  std::erase_if(markup_, [&](const auto& item) { return !live.contains(item.first); });
  std::erase_if(finished_, [&](ExecId e) { return !live.contains(e); });
  changed(lock);
}

void Session::accumulate(wire::Feedback feedback) {
  std::unique_lock lock(mutex_);
  if (terminal(feedback)) finished_.insert(feedback.exec_id);
  markup_[feedback.exec_id].push_back(std::move(feedback));
  changed(lock);
}

SnapshotPtr Session::snapshot() const {
  std::lock_guard lock(mutex_);
  if (snapshot_) return snapshot_;

  auto snap = std::make_shared<Snapshot>();
  snap->version = confirmed_;
  snap->text = text_;
  std::size_t offset = 0;
  for (const auto& span : spans_) {
    SpanInfo info{span.id, span.text, {offset, offset + span.text.size()}, std::nullopt, SpanStatus::pending};
    offset = info.region.end;
    if (auto a = assignment_.find(span.id); a != assignment_.end()) {
      info.exec = a->second;
      if (auto m = markup_.find(a->second); m != markup_.end()) {
        snap->markup.emplace(a->second, m->second);
        const bool failed = std::any_of(m->second.begin(), m->second.end(),
                                        [](const auto& f) { return f.kind == wire::FeedbackKind::error; });
        if (failed) {
          info.status = SpanStatus::failed;
        } else if (finished_.contains(a->second)) {
          info.status = SpanStatus::done;
        }
      }
    }
    snap->spans.push_back(std::move(info));
  }
  snapshot_ = snap;
  return snap;
}

bool Session::quiescent_locked() const {
  if (!pending_.empty()) return false;
  return std::all_of(assignment_.begin(), assignment_.end(),
                     [&](const auto& item) { return finished_.contains(item.second); });
}

bool Session::quiescent() const {
  std::lock_guard lock(mutex_);
  return quiescent_locked();
}

bool Session::await_quiescent(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mutex_);
  cv_.wait_for(lock, timeout, [&] { return quiescent_locked() || disconnected_; });
  return quiescent_locked();
}

std::string Session::text() const {
  std::lock_guard lock(mutex_);
  return text_;
}

std::vector<spans::CommandSpan> Session::spans() const {
  std::lock_guard lock(mutex_);
  return spans_;
}

std::size_t Session::markup_size() const {
  std::lock_guard lock(mutex_);
  std::size_t total = 0;
  for (const auto& [_, items] : markup_) total += items.size();
  return total;
}

std::size_t Session::pending_versions() const {
  std::lock_guard lock(mutex_);
  return pending_.size();
}

bool Session::disconnected() const {
  std::lock_guard lock(mutex_);
  return disconnected_;
}

} // namespace asyncdoc::session
