#include "asyncdoc/protocol.hpp"

#include <algorithm>

#include <spdlog/spdlog.h>

#include "asyncdoc/error.hpp"
#include "asyncdoc/xml_codec.hpp"

namespace asyncdoc::protocol {

namespace codec = xml_codec;
using yxml::Body;
using yxml::Tree;

namespace {

std::int64_t parse_id(const std::string& s, std::string_view what) {
  try {
    return codec::decode_int(Body{Tree::text(s)});
  } catch (const Error&) {
    throw Error(ErrorCode::unknown_shape, std::string(what) + " is not an integer: '" + s + "'");
  }
}

Body encode_command_id(CommandId id) { return codec::encode_int(id.value); }
CommandId decode_command_id(const Body& b) { return CommandId(codec::decode_int(b)); }

Body encode_edit(const EditOp& op) {
  return codec::encode_pair(codec::encode_option(op.after, encode_command_id),
                            codec::encode_option(op.inserted, encode_command_id));
}

EditOp decode_edit(const Body& b) {
  auto [after, inserted] = codec::decode_pair(b);
  return EditOp{codec::decode_option(after, decode_command_id),
                codec::decode_option(inserted, decode_command_id)};
}

bool is_text_body(const Body& b) {
  return !b.empty() && std::all_of(b.begin(), b.end(), [](const Tree& t) { return t.is_text(); });
}

bool is_variant_body(const Body& b) {
  return b.size() == 1 && b.front().is_element() && !b.front().name().empty() &&
         std::all_of(b.front().name().begin(), b.front().name().end(),
                     [](char c) { return c >= '0' && c <= '9'; });
}

} // namespace

wire::CommandCall encode_define_command(const DefineCommand& define) {
  return wire::CommandCall::with_strings(std::string(define_command_name),
                                         {to_string(define.id), "", "", define.text});
}

DefineCommand decode_define_command(const wire::CommandCall& call) {
  if (call.name != define_command_name || call.args.size() != 4) {
    throw Error(ErrorCode::unknown_shape, "not a define_command call: " + call.name);
  }
  return {CommandId(parse_id(call.string_arg(0), "command id")), call.string_arg(3)};
}

Body encode_node_edits(const std::vector<NodeEdits>& edits) {
  return codec::encode_list(edits, [](const NodeEdits& n) {
    return codec::encode_pair(codec::encode_string(n.node),
                              codec::encode_variant(edit_tag, codec::encode_list(n.ops, encode_edit)));
  });
}

std::vector<NodeEdits> decode_node_edits(const Body& body) {
  std::vector<NodeEdits> out;
  for (const auto& tree : body) {
    if (!tree.is_element() || tree.name() != codec::separator) {
      spdlog::info("update: ignored {} outside node entries", tree.is_element() ? "<" + tree.name() + ">" : "text");
      continue;
    }
    const auto& entry = tree.body();
    // A node entry is pair(name, operation); anything else around it is
    // tolerated and ignored.
    std::optional<std::string> name;
    std::optional<codec::Variant> operation;
    std::size_t ignored = 0;
    for (const auto& child : entry) {
      if (!child.is_element() || child.name() != codec::separator) {
        ++ignored;
        continue;
      }
      const auto& part = child.body();
      if (!operation && is_variant_body(part)) {
        operation = codec::decode_variant(part);
      } else if (!operation && is_text_body(part)) {
        name = codec::decode_string(part);
      } else {
        ++ignored;
      }
    }
    if (ignored > 0) spdlog::info("update: ignored {} unknown part(s) in node entry", ignored);
    if (!name || !operation) {
      spdlog::warn("update: skipping node entry without name or operation");
      continue;
    }
    if (operation->tag != edit_tag) {
      spdlog::warn("update: node {}: unsupported operation {}", *name, operation->tag);
      continue;
    }
    out.push_back({*name, codec::decode_list(operation->body, decode_edit)});
  }
  return out;
}

wire::CommandCall encode_update(const Update& update) {
  wire::CommandCall call{std::string(update_name), {}};
  call.args.push_back(codec::encode_int(update.old_version.value));
  call.args.push_back(codec::encode_int(update.new_version.value));
  call.args.push_back(encode_node_edits(update.edits));
  return call;
}

Update decode_update(const wire::CommandCall& call) {
  if (call.name != update_name || call.args.size() < 3) {
    throw Error(ErrorCode::unknown_shape, "not an update call: " + call.name);
  }
  return {VersionId(parse_id(call.string_arg(0), "old version")),
          VersionId(parse_id(call.string_arg(1), "new version")), decode_node_edits(call.args[2])};
}

wire::FunctionMessage encode_assign_update(const AssignUpdate& assign) {
  auto entries = codec::encode_list(assign.assignment, [](const AssignmentEntry& e) {
    return codec::encode_pair(codec::encode_int(e.command.value),
                              codec::encode_list(e.execs, [](ExecId x) { return codec::encode_int(x.value); }));
  });
  return {std::string(assign_update_name),
          codec::encode_pair(codec::encode_int(assign.version.value), std::move(entries))};
}

AssignUpdate decode_assign_update(const wire::FunctionMessage& message) {
  if (message.function != assign_update_name) {
    throw Error(ErrorCode::unknown_shape, "not an assign_update: " + message.function);
  }
  auto [version, entries] = codec::decode_pair(message.body);
  AssignUpdate out{VersionId(codec::decode_int(version)), {}};
  out.assignment = codec::decode_list(entries, [](const Body& b) {
    auto [command, execs] = codec::decode_pair(b);
    return AssignmentEntry{CommandId(codec::decode_int(command)),
                           codec::decode_list(execs, [](const Body& x) { return ExecId(codec::decode_int(x)); })};
  });
  return out;
}

} // namespace asyncdoc::protocol
