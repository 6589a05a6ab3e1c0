#pragma once

/// The document-level messages carried by wire::CommandCall and
/// wire::FunctionMessage.
///
///   Document.define_command  args: id, "", "", text
///   Document.update          args: old version, new version,
///                            list(pair(node, <0> list(pair(option id, option id))))
///   assign_update            body: pair(version, list(pair(command id, list(exec id))))

#include <string>
#include <string_view>
#include <vector>

#include "asyncdoc/ids.hpp"
#include "asyncdoc/messages.hpp"

namespace asyncdoc::protocol {

inline constexpr std::string_view define_command_name = "Document.define_command";
inline constexpr std::string_view update_name = "Document.update";
inline constexpr std::string_view assign_update_name = "assign_update";

/// Variant tag of the Edit node operation.
inline constexpr int edit_tag = 0;

struct DefineCommand {
  CommandId id;
  std::string text;

  bool operator==(const DefineCommand&) const = default;
};

wire::CommandCall encode_define_command(const DefineCommand& define);
DefineCommand decode_define_command(const wire::CommandCall& call);

struct Update {
  VersionId old_version;
  VersionId new_version;
  std::vector<NodeEdits> edits;

  bool operator==(const Update&) const = default;
};

yxml::Body encode_node_edits(const std::vector<NodeEdits>& edits);
/// Lenient: unknown siblings around a node entry and node operations other
/// than Edit are skipped with a log line.
std::vector<NodeEdits> decode_node_edits(const yxml::Body& body);

wire::CommandCall encode_update(const Update& update);
Update decode_update(const wire::CommandCall& call);

struct AssignUpdate {
  VersionId version;
  Assignment assignment;

  bool operator==(const AssignUpdate&) const = default;
};

wire::FunctionMessage encode_assign_update(const AssignUpdate& assign);
AssignUpdate decode_assign_update(const wire::FunctionMessage& message);

} // namespace asyncdoc::protocol
