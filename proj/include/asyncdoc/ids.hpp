#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace asyncdoc {

/// Integer identifier tagged with its role. Frontend-assigned ids (commands,
/// versions) are negative; prover-assigned execution ids are positive.
template <class Tag>
struct Id {
  std::int64_t value = 0;

  constexpr Id() = default;
  constexpr explicit Id(std::int64_t v) : value(v) {}

  constexpr auto operator<=>(const Id&) const = default;
};

template <class Tag>
std::ostream& operator<<(std::ostream& os, Id<Tag> id) {
  return os << id.value;
}

template <class Tag>
std::string to_string(Id<Tag> id) {
  return std::to_string(id.value);
}

using CommandId = Id<struct CommandIdTag>;
using ExecId = Id<struct ExecIdTag>;
using VersionId = Id<struct VersionIdTag>;

/// One element of the `<0>` Edit operation: (None, c) inserts c at the
/// front, (p, c) inserts c after p, (p, None) deletes the command after p,
/// and (None, None) deletes the first command.
struct EditOp {
  std::optional<CommandId> after;
  std::optional<CommandId> inserted;

  static EditOp insert(std::optional<CommandId> after, CommandId what) { return {after, what}; }
  static EditOp remove(std::optional<CommandId> after) { return {after, std::nullopt}; }

  bool is_insert() const { return inserted.has_value(); }
  bool operator==(const EditOp&) const = default;
};

struct NodeEdits {
  std::string node;
  std::vector<EditOp> ops;

  bool operator==(const NodeEdits&) const = default;
};

struct AssignmentEntry {
  CommandId command;
  std::vector<ExecId> execs;

  bool operator==(const AssignmentEntry&) const = default;
};

using Assignment = std::vector<AssignmentEntry>;

} // namespace asyncdoc

template <class Tag>
struct std::hash<asyncdoc::Id<Tag>> {
  std::size_t operator()(asyncdoc::Id<Tag> id) const noexcept {
    return std::hash<std::int64_t>{}(id.value);
  }
};
