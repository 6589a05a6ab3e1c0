#include "asyncdoc/document.hpp"

#include <algorithm>

#include "asyncdoc/error.hpp"

namespace asyncdoc::document {

void CommandTable::define(CommandId id, std::string text) {
  if (!commands_.emplace(id, std::move(text)).second) {
    throw Error(ErrorCode::duplicate_definition, "command " + to_string(id) + " is already defined");
  }
}

const std::string& CommandTable::lookup(CommandId id) const {
  auto it = commands_.find(id);
  if (it == commands_.end()) {
    throw Error(ErrorCode::undefined_command, "command " + to_string(id) + " is not defined");
  }
  return it->second;
}

const NodeEntries& DocumentVersion::node(const std::string& name) const {
  static const NodeEntries empty;
  auto it = nodes.find(name);
  return it == nodes.end() ? empty : it->second;
}

std::vector<CommandId> apply_edits(std::vector<CommandId> commands, const std::vector<EditOp>& ops) {
  for (const auto& op : ops) {
    auto pos = commands.begin();
    if (op.after) {
      pos = std::find(commands.begin(), commands.end(), *op.after);
      if (pos == commands.end()) {
        throw Error(ErrorCode::dangling_reference, "no command " + to_string(*op.after) + " in document");
      }
      ++pos;
    }
    if (op.inserted) {
      commands.insert(pos, *op.inserted);
    } else {
      if (pos == commands.end()) {
        throw Error(ErrorCode::delete_at_end,
                    op.after ? "nothing after command " + to_string(*op.after) : "document is empty");
      }
      commands.erase(pos);
    }
  }
  return commands;
}

std::size_t common_prefix(const NodeEntries& old_entries, const std::vector<CommandId>& new_commands) {
  std::size_t k = 0;
  while (k < old_entries.size() && k < new_commands.size() && old_entries[k].command == new_commands[k] &&
         old_entries[k].exec) {
    ++k;
  }
  return k;
}

NodeEntries assign_execs(const NodeEntries& old_entries, const std::vector<CommandId>& new_commands,
                         std::int64_t& next_exec) {
  const std::size_t k = common_prefix(old_entries, new_commands);
  NodeEntries out(old_entries.begin(), old_entries.begin() + static_cast<std::ptrdiff_t>(k));
  out.reserve(new_commands.size());
  for (std::size_t i = k; i < new_commands.size(); ++i) {
    out.push_back({new_commands[i], ExecId(next_exec++)});
  }
  return out;
}

DocumentStore::DocumentStore(std::size_t history) : history_(std::max<std::size_t>(history, 1)) {
  versions_.push_back(std::make_shared<const DocumentVersion>(DocumentVersion{VersionId(0), {}}));
}

void DocumentStore::define_command(CommandId id, std::string text) { commands_.define(id, std::move(text)); }

VersionPtr DocumentStore::version(VersionId id) const {
  for (auto it = versions_.rbegin(); it != versions_.rend(); ++it) {
    if ((*it)->id == id) return *it;
  }
  throw Error(ErrorCode::unknown_version, "version " + to_string(id) + " is unknown");
}

UpdateResult DocumentStore::update(VersionId old_version, VersionId new_version,
                                   const std::vector<NodeEdits>& edits) {
  const auto old = version(old_version);

  // Fold everything first so a bad edit leaves the store untouched.
  std::map<std::string, std::vector<CommandId>> folded;
  for (const auto& node_edits : edits) {
    std::vector<CommandId> base;
    if (auto it = folded.find(node_edits.node); it != folded.end()) {
      base = it->second;
    } else {
      for (const auto& e : old->node(node_edits.node)) base.push_back(e.command);
    }
    for (const auto& op : node_edits.ops) {
      if (op.inserted && !commands_.contains(*op.inserted)) {
        throw Error(ErrorCode::dangling_reference, "command " + to_string(*op.inserted) + " was never defined");
      }
    }
    folded[node_edits.node] = apply_edits(std::move(base), node_edits.ops);
  }

  DocumentVersion next{new_version, old->nodes};
  UpdateResult result;
  for (const auto& [name, commands] : folded) {
    const auto& old_entries = old->node(name);
    const std::size_t k = common_prefix(old_entries, commands);
    auto entries = assign_execs(old_entries, commands, next_exec_);

    NodeChange change{name, std::nullopt, {}, entries};
    if (k > 0) change.last_common = entries[k - 1].exec;
    change.inserted.assign(entries.begin() + static_cast<std::ptrdiff_t>(k), entries.end());
    result.changes.push_back(std::move(change));

    if (entries.empty()) {
      next.nodes.erase(name);
    } else {
      next.nodes[name] = std::move(entries);
    }
  }
  for (const auto& [name, entries] : next.nodes) {
    for (const auto& e : entries) result.assignment.push_back({e.command, {*e.exec}});
  }

  result.version = std::make_shared<const DocumentVersion>(std::move(next));
  versions_.push_back(result.version);
  while (versions_.size() > history_) versions_.pop_front();
  return result;
}

} // namespace asyncdoc::document
