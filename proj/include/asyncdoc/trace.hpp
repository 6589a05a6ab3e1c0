#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <mutex>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "asyncdoc/channel.hpp"

namespace asyncdoc::trace {

/// One chunk as seen by the editor: "out" towards the prover, "in" from it.
struct Record {
  std::int64_t seq = 0;
  wire::Direction direction = wire::Direction::outbound;
  std::size_t length = 0;
  std::int64_t ts_us = 0;
  std::string xml;
  std::string raw;
};

/// Pretty XML rendering of a chunk, or a placeholder if it is not YXML.
std::string render_chunk(std::string_view payload);

nlohmann::json to_json(const Record& record);
/// Throws Error(script_parse) on a malformed record.
Record from_json(const nlohmann::json& value);

/// One JSON object per line, without the timestamp when `with_time` is false.
std::string to_line(const Record& record, bool with_time = true);

/// Collects chunk records from a channel observer and optionally streams
/// them as JSON lines.
class Recorder {
public:
  explicit Recorder(std::ostream* out = nullptr);

  wire::Channel::Observer observer();
  void attach(wire::Channel& channel) { channel.set_observer(observer()); }

  std::vector<Record> records() const;
  void set_listener(std::function<void(const Record&)> listener);

private:
  void record(wire::Direction direction, std::string_view payload);

  std::ostream* out_;
  std::chrono::steady_clock::time_point origin_ = std::chrono::steady_clock::now();
  mutable std::mutex mutex_;
  std::int64_t next_seq_ = 1;
  std::vector<Record> records_;
  std::function<void(const Record&)> listener_;
};

} // namespace asyncdoc::trace
