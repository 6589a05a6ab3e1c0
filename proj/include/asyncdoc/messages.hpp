#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "asyncdoc/channel.hpp"
#include "asyncdoc/ids.hpp"
#include "asyncdoc/yxml.hpp"

namespace asyncdoc::wire {

/// Editor -> prover call: `<prover_command name=N><prover_arg>..</prover_arg>..`.
/// Each argument is an XML body; plain string arguments are a single text
/// node, and the empty string is an empty `<prover_arg/>`.
struct CommandCall {
  std::string name;
  std::vector<yxml::Body> args;

  static CommandCall with_strings(std::string name, const std::vector<std::string>& args);

  /// Text content of argument `i`; throws unknown_shape if it has markup.
  std::string string_arg(std::size_t i) const;

  bool operator==(const CommandCall&) const = default;
};

std::string encode_command_call(const CommandCall& call);
/// Throws UnknownShape if the root element is not prover_command.
CommandCall decode_command_call(std::string_view bytes);

/// Prover -> editor function call, sent as two chunks: the header
/// `<protocol function=F/>` and then the body.
struct FunctionMessage {
  std::string function;
  yxml::Body body;

  bool operator==(const FunctionMessage&) const = default;
};

std::pair<std::string, std::string> encode_function_message(const FunctionMessage& message);
FunctionMessage decode_function_message(std::string_view header, std::string_view body);

enum class FeedbackKind { writeln, error, report };

std::string_view to_string(FeedbackKind kind);

struct Feedback {
  FeedbackKind kind = FeedbackKind::writeln;
  std::int64_t serial = 0;
  ExecId exec_id;
  yxml::Body content;
  /// 1-based, end exclusive, relative to the command text.
  std::optional<std::int64_t> offset;
  std::optional<std::int64_t> end_offset;

  /// Text content (for writeln and error).
  std::string text() const { return yxml::content_of(content); }

  bool operator==(const Feedback&) const = default;
};

Feedback make_text_feedback(FeedbackKind kind, ExecId exec_id, const std::string& text);

/// `<writeln serial=S id=E>..</writeln>`, offsets added as attributes when set.
std::string encode_feedback(const Feedback& feedback);
Feedback decode_feedback(std::string_view bytes);

/// Hyperlink payload of a report message.
struct Entity {
  ExecId def_id;
  ExecId id;
  std::int64_t offset = 0;
  std::int64_t end_offset = 0;
  std::int64_t def_offset = 0;
  std::int64_t def_end_offset = 0;
  std::string name;
  std::string kind;

  bool operator==(const Entity&) const = default;
};

yxml::Tree encode_entity(const Entity& entity);
Entity decode_entity(const yxml::Tree& tree);

/// Report feedback wrapping a single entity; offsets mirror the entity's.
Feedback make_entity_report(const Entity& entity);

/// Entities carried by a report feedback (non-entity children are skipped).
std::vector<Entity> entities_of(const Feedback& report);

using Inbound = std::variant<Feedback, FunctionMessage>;

/// Reads one prover -> editor message: a feedback chunk, or a function
/// header chunk followed by its body chunk.
Inbound read_inbound(Channel& channel);

} // namespace asyncdoc::wire
