#pragma once

/// A tiny proof checker over integer equalities, enough to drive every
/// feedback kind end to end.
///
///   Definition N := E.      bind N to the value of E
///   Lemma N : E = E.        open a proof with one goal, bind N as a theorem
///   Proof.                  no-op inside a proof
///   idtac.                  no-op tactic
///   reflexivity.            close the head goal if both sides are equal
///   Qed.                    close the proof; fails while goals remain
///   Check N.                print the statement of N
///
/// Expressions: integer literals, defined names, `+`, `*`, parentheses.
/// Comments `(* .. *)` are ignored. Offsets in feedback are 1-based with an
/// exclusive end, relative to the command text.

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "asyncdoc/ids.hpp"
#include "asyncdoc/messages.hpp"

namespace asyncdoc::miniprover {

enum class EntryKind { thm, def };

std::string_view to_string(EntryKind kind);

struct EnvEntry {
  EntryKind kind = EntryKind::def;
  /// "E1 = E2" for theorems, the defining expression for definitions.
  std::string statement;
  std::int64_t value = 0;
  ExecId def_id;
  std::int64_t def_offset = 0;
  std::int64_t def_end_offset = 0;

  bool operator==(const EnvEntry&) const = default;
};

using Environment = std::map<std::string, EnvEntry, std::less<>>;

struct Goal {
  std::string text;
  std::int64_t lhs = 0;
  std::int64_t rhs = 0;

  bool operator==(const Goal&) const = default;
};

struct Proof {
  std::string name;
  std::vector<Goal> goals;

  bool operator==(const Proof&) const = default;
};

struct ProverState {
  Environment env;
  std::optional<Proof> proof;

  bool operator==(const ProverState&) const = default;
};

/// Goal display: "<n> subgoal(s)", the hypotheses (none in this logic), a
/// separator line of '=', then the head goal. "No more subgoals." once all
/// goals are closed; empty outside a proof.
std::string render_state(const ProverState& state);

/// How a command brackets proofs, for the execution graph.
enum class CommandShape { plain, opening, closing };

CommandShape classify(std::string_view text);

struct Options {
  /// Artificial latency of each tactic (idtac, reflexivity).
  std::chrono::milliseconds tactic_delay{0};
};

struct Outcome {
  ProverState state;
  std::vector<wire::Feedback> feedback;
  bool ok = true;
};

/// Runs one command. Never throws for bad input: failures become error
/// feedback and leave the state unchanged. Feedback comes in order: entity
/// reports, then exactly one writeln (success) or error (failure). Serial
/// numbers are left at zero for the caller to assign.
Outcome exec_command(const ProverState& state, std::string_view text, ExecId exec, const Options& options = {});

/// One report per occurrence of a defined name in `text`, excluding the
/// binding occurrence of a Definition or Lemma.
std::vector<wire::Feedback> entity_report(const Environment& env, std::string_view text, ExecId exec);

} // namespace asyncdoc::miniprover
