#include "asyncdoc/trace.hpp"

#include "asyncdoc/error.hpp"
#include "asyncdoc/yxml.hpp"

namespace asyncdoc::trace {

using nlohmann::json;

std::string render_chunk(std::string_view payload) {
  try {
    return yxml::to_xml(yxml::decode(payload), true);
  } catch (const Error&) {
    return "<!-- undecodable chunk -->";
  }
}

json to_json(const Record& record) {
  return json{{"seq", record.seq},
              {"dir", record.direction == wire::Direction::outbound ? "out" : "in"},
              {"len", record.length},
              {"ts_us", record.ts_us},
              {"xml", record.xml},
              {"raw", record.raw}};
}

Record from_json(const json& value) {
  try {
    Record r;
    r.seq = value.at("seq").get<std::int64_t>();
    const auto dir = value.at("dir").get<std::string>();
    if (dir != "out" && dir != "in") throw Error(ErrorCode::script_parse, "bad trace direction " + dir);
    r.direction = dir == "out" ? wire::Direction::outbound : wire::Direction::inbound;
    r.length = value.at("len").get<std::size_t>();
    r.ts_us = value.value("ts_us", std::int64_t{0});
    r.xml = value.at("xml").get<std::string>();
    r.raw = value.at("raw").get<std::string>();
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::script_parse, std::string("bad trace record: ") + e.what());
  }
}

std::string to_line(const Record& record, bool with_time) {
  auto value = to_json(record);
  if (!with_time) value.erase("ts_us");
  return value.dump(-1, ' ', false, json::error_handler_t::replace);
}

Recorder::Recorder(std::ostream* out) : out_(out) {}

wire::Channel::Observer Recorder::observer() {
  return [this](wire::Direction direction, std::string_view payload) { record(direction, payload); };
}

void Recorder::record(wire::Direction direction, std::string_view payload) {
  const auto ts = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - origin_);
  Record r{0, direction, payload.size(), ts.count(), render_chunk(payload), std::string(payload)};
  std::function<void(const Record&)> listener;
  {
    std::lock_guard lock(mutex_);
    r.seq = next_seq_++;
    if (out_) *out_ << to_line(r) << '\n' << std::flush;
    records_.push_back(r);
    listener = listener_;
  }
  if (listener) listener(r);
}

std::vector<Record> Recorder::records() const {
  std::lock_guard lock(mutex_);
  return records_;
}

void Recorder::set_listener(std::function<void(const Record&)> listener) {
  std::lock_guard lock(mutex_);
  listener_ = std::move(listener);
}

} // namespace asyncdoc::trace
