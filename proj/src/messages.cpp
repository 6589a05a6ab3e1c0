#include "asyncdoc/messages.hpp"

#include <charconv>

#include "asyncdoc/error.hpp"

namespace asyncdoc::wire {

using yxml::Body;
using yxml::Tree;

namespace {

const Tree& single_root(const Body& body, std::string_view what) {
  if (body.size() != 1 || !body.front().is_element()) {
    throw Error(ErrorCode::unknown_shape, std::string(what) + " must be a single element");
  }
  return body.front();
}

std::int64_t int_attribute(const Tree& tree, std::string_view key) {
  const auto value = tree.attribute(key);
  if (!value) {
    throw Error(ErrorCode::unknown_shape, "<" + tree.name() + "> lacks attribute " + std::string(key));
  }
  std::int64_t out = 0;
  const auto* end = value->data() + value->size();
  auto [ptr, ec] = std::from_chars(value->data(), end, out);
  if (value->empty() || ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::unknown_shape, "attribute " + std::string(key) + " is not an integer");
  }
  return out;
}

std::optional<std::int64_t> optional_int_attribute(const Tree& tree, std::string_view key) {
  if (!tree.attribute(key)) return std::nullopt;
  return int_attribute(tree, key);
}

} // namespace

CommandCall CommandCall::with_strings(std::string name, const std::vector<std::string>& args) {
  CommandCall call{std::move(name), {}};
  for (const auto& a : args) {
    call.args.push_back(a.empty() ? Body{} : Body{Tree::text(a)});
  }
  return call;
}

std::string CommandCall::string_arg(std::size_t i) const {
  if (i >= args.size()) {
    throw Error(ErrorCode::unknown_shape, name + ": missing argument " + std::to_string(i));
  }
  for (const auto& t : args[i]) {
    if (!t.is_text()) throw Error(ErrorCode::unknown_shape, name + ": argument is not a string");
  }
  return yxml::content_of(args[i]);
}

std::string encode_command_call(const CommandCall& call) {
  Body args;
  for (const auto& a : call.args) args.push_back(Tree::element("prover_arg", {}, a));
  return yxml::encode(Tree::element("prover_command", {{"name", call.name}}, std::move(args)));
}

CommandCall decode_command_call(std::string_view bytes) {
  const auto body = yxml::decode(bytes);
  const auto& root = single_root(body, "command call");
  if (root.name() != "prover_command") {
    throw Error(ErrorCode::unknown_shape, "expected prover_command, got " + root.name());
  }
  const auto name = root.attribute("name");
  if (!name || name->empty()) throw Error(ErrorCode::unknown_shape, "prover_command without name");
  CommandCall call{std::string(*name), {}};
  for (const auto& arg : root.body()) {
    if (!arg.is_element() || arg.name() != "prover_arg") {
      throw Error(ErrorCode::unknown_shape, "unexpected child of prover_command");
    }
    call.args.push_back(arg.body());
  }
  return call;
}

std::pair<std::string, std::string> encode_function_message(const FunctionMessage& message) {
  return {yxml::encode(Tree::element("protocol", {{"function", message.function}})),
          yxml::encode(message.body)};
}

FunctionMessage decode_function_message(std::string_view header, std::string_view body) {
  const auto head = yxml::decode(header);
  const auto& root = single_root(head, "function header");
  const auto function = root.attribute("function");
  if (root.name() != "protocol" || !function) {
    throw Error(ErrorCode::unknown_shape, "expected <protocol function=..>, got " + root.name());
  }
  return {std::string(*function), yxml::decode(body)};
}

std::string_view to_string(FeedbackKind kind) {
  switch (kind) {
  case FeedbackKind::writeln: return "writeln";
  case FeedbackKind::error: return "error";
  case FeedbackKind::report: return "report";
  }
  return "writeln";
}

Feedback make_text_feedback(FeedbackKind kind, ExecId exec_id, const std::string& text) {
  Feedback f;
  f.kind = kind;
  f.exec_id = exec_id;
  if (!text.empty()) f.content.push_back(Tree::text(text));
  return f;
}

std::string encode_feedback(const Feedback& feedback) {
  yxml::Attributes attrs{{"serial", std::to_string(feedback.serial)},
                         {"id", to_string(feedback.exec_id)}};
  if (feedback.offset) attrs.emplace_back("offset", std::to_string(*feedback.offset));
  if (feedback.end_offset) attrs.emplace_back("end_offset", std::to_string(*feedback.end_offset));
  return yxml::encode(Tree::element(std::string(to_string(feedback.kind)), std::move(attrs), feedback.content));
}

Feedback decode_feedback(std::string_view bytes) {
  const auto body = yxml::decode(bytes);
  const auto& root = single_root(body, "feedback");
  Feedback f;
  if (root.name() == "writeln") {
    f.kind = FeedbackKind::writeln;
  } else if (root.name() == "error") {
    f.kind = FeedbackKind::error;
  } else if (root.name() == "report") {
    f.kind = FeedbackKind::report;
  } else {
    throw Error(ErrorCode::unknown_shape, "unknown feedback kind " + root.name());
  }
  f.serial = int_attribute(root, "serial");
  f.exec_id = ExecId(int_attribute(root, "id"));
  f.offset = optional_int_attribute(root, "offset");
  f.end_offset = optional_int_attribute(root, "end_offset");
  f.content = root.body();
  return f;
}

Tree encode_entity(const Entity& e) {
  return Tree::element("entity", {{"def_id", to_string(e.def_id)},
                                  {"id", to_string(e.id)},
                                  {"offset", std::to_string(e.offset)},
                                  {"end_offset", std::to_string(e.end_offset)},
                                  {"def_offset", std::to_string(e.def_offset)},
                                  {"def_end_offset", std::to_string(e.def_end_offset)},
                                  {"name", e.name},
                                  {"kind", e.kind}});
}

Entity decode_entity(const Tree& tree) {
  if (!tree.is_element() || tree.name() != "entity") {
    throw Error(ErrorCode::unknown_shape, "expected <entity>");
  }
  Entity e;
  e.def_id = ExecId(int_attribute(tree, "def_id"));
  e.id = ExecId(int_attribute(tree, "id"));
  e.offset = int_attribute(tree, "offset");
  e.end_offset = int_attribute(tree, "end_offset");
  e.def_offset = int_attribute(tree, "def_offset");
  e.def_end_offset = int_attribute(tree, "def_end_offset");
  e.name = std::string(tree.attribute("name").value_or(""));
  e.kind = std::string(tree.attribute("kind").value_or(""));
  return e;
}

Feedback make_entity_report(const Entity& entity) {
  Feedback f;
  f.kind = FeedbackKind::report;
  f.exec_id = entity.id;
  f.offset = entity.offset;
  f.end_offset = entity.end_offset;
  f.content.push_back(encode_entity(entity));
  return f;
}

std::vector<Entity> entities_of(const Feedback& report) {
  std::vector<Entity> out;
  for (const auto& t : report.content) {
    if (t.is_element() && t.name() == "entity") out.push_back(decode_entity(t));
  }
  return out;
}

Inbound read_inbound(Channel& channel) {
  auto chunk = channel.read_chunk();
  const auto body = yxml::decode(chunk);
  const auto& root = single_root(body, "inbound message");
  if (root.name() == "protocol") {
    auto payload = channel.read_chunk();
    return decode_function_message(chunk, payload);
  }
  return decode_feedback(chunk);
}

} // namespace asyncdoc::wire
