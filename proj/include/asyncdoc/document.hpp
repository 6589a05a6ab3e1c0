#pragma once

#include <cstddef>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "asyncdoc/ids.hpp"

namespace asyncdoc::document {

/// Command id -> command text. Definitions are write-once.
class CommandTable {
public:
  /// Throws Error(duplicate_definition).
  void define(CommandId id, std::string text);
  /// Throws Error(undefined_command).
  const std::string& lookup(CommandId id) const;
  bool contains(CommandId id) const { return commands_.contains(id); }
  std::size_t size() const { return commands_.size(); }

private:
  std::unordered_map<CommandId, std::string> commands_;
};

struct Entry {
  CommandId command;
  std::optional<ExecId> exec;

  bool operator==(const Entry&) const = default;
};

using NodeEntries = std::vector<Entry>;

/// Immutable snapshot of the document: per file node, the ordered commands
/// with the execution assigned to each.
struct DocumentVersion {
  VersionId id;
  std::map<std::string, NodeEntries> nodes;

  const NodeEntries& node(const std::string& name) const;
};

using VersionPtr = std::shared_ptr<const DocumentVersion>;

/// Left fold of `ops` over `commands`. Throws DanglingReference when an
/// anchor is absent, DeleteAtEnd when there is nothing after the anchor.
std::vector<CommandId> apply_edits(std::vector<CommandId> commands, const std::vector<EditOp>& ops);

/// Length of the longest common prefix of the two command lists.
std::size_t common_prefix(const NodeEntries& old_entries, const std::vector<CommandId>& new_commands);

/// Reuses the old execution ids on the longest common prefix and draws
/// fresh ones from `next_exec` for every later position.
NodeEntries assign_execs(const NodeEntries& old_entries, const std::vector<CommandId>& new_commands,
                         std::int64_t& next_exec);

/// What the execution engine needs to know about one node after an update.
struct NodeChange {
  std::string node;
  /// Last retained entry (execution kept), or none when nothing is retained.
  std::optional<ExecId> last_common;
  /// Entries after last_common, all with fresh execution ids.
  std::vector<Entry> inserted;
  /// Full assignment of the node in the new version.
  NodeEntries entries;
};

struct UpdateResult {
  VersionPtr version;
  Assignment assignment;
  std::vector<NodeChange> changes;
};

/// Prover-side store of command definitions and document versions.
///
/// Keeps the most recent `history` versions; version 0 (the empty document)
/// exists from the start. Single owner: callers serialize define/update.
class DocumentStore {
public:
  static constexpr std::size_t default_history = 16;

  explicit DocumentStore(std::size_t history = default_history);

  void define_command(CommandId id, std::string text);
  const CommandTable& commands() const { return commands_; }

  /// Throws UnknownVersion, or the fold errors of apply_edits. On error no
  /// version is registered and no execution id is consumed.
  UpdateResult update(VersionId old_version, VersionId new_version, const std::vector<NodeEdits>& edits);

  VersionPtr version(VersionId id) const;
  VersionPtr latest() const { return versions_.back(); }
  std::size_t version_count() const { return versions_.size(); }

private:
  std::size_t history_;
  CommandTable commands_;
  std::deque<VersionPtr> versions_;
  std::int64_t next_exec_ = 1;
};

} // namespace asyncdoc::document
