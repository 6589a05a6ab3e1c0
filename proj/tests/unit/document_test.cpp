#include <set>

#include <gtest/gtest.h>

#include "asyncdoc/document.hpp"
#include "asyncdoc/error.hpp"
#include "asyncdoc/span_parser.hpp"
#include "support.hpp"

using namespace asyncdoc;
using namespace asyncdoc::document;
using asyncdoc::testing::coin;
using asyncdoc::testing::pick;
using asyncdoc::testing::Rng;

namespace {

CommandId C(std::int64_t v) { return CommandId(v); }

std::optional<ErrorCode> error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

/// Splice oracle: locate the anchor by index, rebuild the list from slices.
std::vector<CommandId> splice(std::vector<CommandId> doc, const std::vector<EditOp>& ops) {
  for (const auto& op : ops) {
    std::size_t at = 0;
    if (op.after) {
      std::size_t i = 0;
      while (i < doc.size() && doc[i] != *op.after) ++i;
      if (i == doc.size()) throw Error(ErrorCode::dangling_reference, "oracle");
      at = i + 1;
    }
    std::vector<CommandId> next(doc.begin(), doc.begin() + static_cast<std::ptrdiff_t>(at));
    if (op.inserted) {
      next.push_back(*op.inserted);
      next.insert(next.end(), doc.begin() + static_cast<std::ptrdiff_t>(at), doc.end());
    } else {
      if (at == doc.size()) throw Error(ErrorCode::delete_at_end, "oracle");
      next.insert(next.end(), doc.begin() + static_cast<std::ptrdiff_t>(at) + 1, doc.end());
    }
    doc = std::move(next);
  }
  return doc;
}

std::vector<NodeEdits> node(std::vector<EditOp> ops) { return {{"foo.v", std::move(ops)}}; }

} // namespace

TEST(CommandTable, DefineAndLookup) {
  DocumentStore store;
  store.define_command(C(-1), "Proof.\n  ");
  EXPECT_EQ(store.commands().lookup(C(-1)), "Proof.\n  ");
  EXPECT_EQ(error_of([&] { store.define_command(C(-1), "x"); }), ErrorCode::duplicate_definition);
  EXPECT_EQ(error_of([&] { store.commands().lookup(C(-9)); }), ErrorCode::undefined_command);
}

TEST(ApplyEdits, TranscriptOps) {
  EXPECT_EQ(apply_edits({}, {EditOp::insert(std::nullopt, C(-1)), EditOp::insert(C(-1), C(-2))}),
            (std::vector<CommandId>{C(-1), C(-2)}));
}

TEST(ApplyEdits, DeleteAfter) {
  EXPECT_EQ(apply_edits({C(-1), C(-2), C(-3)}, {EditOp::remove(C(-1))}), (std::vector<CommandId>{C(-1), C(-3)}));
  EXPECT_EQ(apply_edits({C(-1), C(-2)}, {EditOp::remove(std::nullopt)}), (std::vector<CommandId>{C(-2)}));
}

TEST(ApplyEdits, Errors) {
  EXPECT_EQ(error_of([] { apply_edits({C(-1)}, {EditOp::insert(C(-7), C(-2))}); }), ErrorCode::dangling_reference);
  EXPECT_EQ(error_of([] { apply_edits({C(-1)}, {EditOp::remove(C(-1))}); }), ErrorCode::delete_at_end);
  EXPECT_EQ(error_of([] { apply_edits({}, {EditOp::remove(std::nullopt)}); }), ErrorCode::delete_at_end);
}

TEST(ApplyEditsProperty, AgreesWithSpliceOracle) {
  Rng rng(9);
  for (int i = 0; i < 10000; ++i) {
    std::vector<CommandId> doc;
    std::int64_t next = -1;
    for (std::size_t n = pick(rng, 8); n > 0; --n) doc.push_back(C(next--));
    std::vector<CommandId> live = doc;
    std::vector<EditOp> ops;
    for (std::size_t n = pick(rng, 8); n > 0; --n) {
      std::optional<CommandId> after;
      if (!live.empty() && coin(rng, 0.8)) after = live[pick(rng, live.size())];
      if (coin(rng, 0.05)) after = C(-1000);
      if (coin(rng, 0.6)) {
        ops.push_back(EditOp::insert(after, C(next)));
        live.push_back(C(next--));
      } else {
        ops.push_back(EditOp::remove(after));
      }
    }
    std::optional<std::vector<CommandId>> expected;
    std::optional<ErrorCode> expected_error;
    try {
      expected = splice(doc, ops);
    } catch (const Error& e) {
      expected_error = e.code();
    }
    std::optional<std::vector<CommandId>> actual;
    std::optional<ErrorCode> actual_error;
    try {
      actual = apply_edits(doc, ops);
    } catch (const Error& e) {
      actual_error = e.code();
    }
    ASSERT_EQ(actual, expected);
    ASSERT_EQ(actual_error, expected_error);
  }
}

TEST(AssignExecs, ReusesExactlyTheCommonPrefix) {
  const NodeEntries old{{C(-1), ExecId(1)}, {C(-2), ExecId(2)}, {C(-3), ExecId(3)}};
  std::int64_t next = 10;
  const auto entries = assign_execs(old, {C(-1), C(-4), C(-3)}, next);
  EXPECT_EQ(entries, (NodeEntries{{C(-1), ExecId(1)}, {C(-4), ExecId(10)}, {C(-3), ExecId(11)}}));
  EXPECT_EQ(next, 12);
}

TEST(DocumentStore, TranscriptUpdate) {
  DocumentStore store;
  store.define_command(C(-1), "Proof.\n  ");
  store.define_command(C(-2), "intros l.");
  const auto result = store.update(VersionId(0), VersionId(-1492),
                                   node({EditOp::insert(std::nullopt, C(-1)), EditOp::insert(C(-1), C(-2))}));
  EXPECT_EQ(result.version->id, VersionId(-1492));
  EXPECT_EQ(result.assignment, (Assignment{{C(-1), {ExecId(1)}}, {C(-2), {ExecId(2)}}}));
  ASSERT_EQ(result.changes.size(), 1u);
  EXPECT_EQ(result.changes[0].last_common, std::nullopt);
  EXPECT_EQ(result.changes[0].inserted.size(), 2u);
  EXPECT_EQ(store.version(VersionId(-1492)), result.version);
}

TEST(DocumentStore, EmptyOpsKeepEverything) {
  DocumentStore store;
  store.define_command(C(-1), "a.");
  const auto first = store.update(VersionId(0), VersionId(-2), node({EditOp::insert(std::nullopt, C(-1))}));
  const auto second = store.update(VersionId(-2), VersionId(-3), node({}));
  EXPECT_EQ(second.version->nodes, first.version->nodes);
  EXPECT_EQ(second.assignment, first.assignment);
  EXPECT_TRUE(second.changes[0].inserted.empty());
  EXPECT_EQ(second.changes[0].last_common, ExecId(1));
}

TEST(DocumentStore, ErrorsLeaveStoreUntouched) {
  DocumentStore store;
  store.define_command(C(-1), "a.");
  EXPECT_EQ(error_of([&] { store.update(VersionId(-5), VersionId(-6), {}); }), ErrorCode::unknown_version);
  EXPECT_EQ(error_of([&] { store.update(VersionId(0), VersionId(-6), node({EditOp::insert(std::nullopt, C(-9))})); }),
            ErrorCode::dangling_reference);
  EXPECT_EQ(error_of([&] { store.update(VersionId(0), VersionId(-6), node({EditOp::remove(C(-1))})); }),
            ErrorCode::dangling_reference);
  EXPECT_EQ(store.version_count(), 1u);
  const auto ok = store.update(VersionId(0), VersionId(-6), node({EditOp::insert(std::nullopt, C(-1))}));
  EXPECT_EQ(ok.assignment[0].execs, std::vector<ExecId>{ExecId(1)});
}

TEST(DocumentStore, OldVersionsAreImmutableAndHistoryIsBounded) {
  DocumentStore store;
  std::int64_t id = -1;
  std::optional<CommandId> last;
  VersionId version(0);
  std::vector<VersionPtr> seen;
  std::vector<document::NodeEntries> copies;
  for (int i = 0; i < 40; ++i) {
    const CommandId c(id--);
    store.define_command(c, "x.");
    const VersionId next(id--);
    const auto result = store.update(version, next, node({EditOp::insert(last, c)}));
    seen.push_back(result.version);
    copies.push_back(result.version->node("foo.v"));
    version = next;
    last = c;
  }
  EXPECT_EQ(store.version_count(), DocumentStore::default_history);
  for (std::size_t i = 0; i < seen.size(); ++i) EXPECT_EQ(seen[i]->node("foo.v"), copies[i]);
  EXPECT_EQ(error_of([&] { store.version(seen.front()->id); }), ErrorCode::unknown_version);
}

TEST(DocumentStoreProperty, RandomSessionsMatchFullParse) {
  // Drive the store with the span lists of random buffers: the stored
  // command texts must always spell the buffer, execution ids must be fresh
  // and reused exactly on the common prefix.
  Rng rng(10);
  const spans::PeriodParser parser;
  for (int run = 0; run < 200; ++run) {
    DocumentStore store;
    std::int64_t next_id = -1;
    VersionId version(0);
    std::vector<std::pair<std::string, CommandId>> current;
    std::set<std::int64_t> issued;
    NodeEntries previous;
    for (int step = 0; step < 15; ++step) {
      const auto text = asyncdoc::testing::random_proof_text(rng, pick(rng, 10));
      const auto spans = parser.parse_spans(text);
      // Reuse ids for spans equal to one at the same index.
      std::vector<std::pair<std::string, CommandId>> next;
      for (std::size_t i = 0; i < spans.size(); ++i) {
        if (i < current.size() && current[i].first == spans[i].text) {
          next.push_back(current[i]);
        } else {
          const CommandId c(next_id--);
          store.define_command(c, spans[i].text);
          next.emplace_back(spans[i].text, c);
        }
      }
      std::vector<EditOp> ops;
      for (std::size_t i = 0; i < current.size(); ++i) ops.push_back(EditOp::remove(std::nullopt));
      std::optional<CommandId> anchor;
      for (const auto& [_, c] : next) {
        ops.push_back(EditOp::insert(anchor, c));
        anchor = c;
      }
      const VersionId v(next_id--);
      const auto result = store.update(version, v, node(ops));
      const auto& entries = result.version->node("foo.v");
      std::string spelled;
      for (const auto& e : entries) spelled += store.commands().lookup(e.command);
      ASSERT_EQ(spelled, text);
      std::size_t prefix = 0;
      while (prefix < previous.size() && prefix < entries.size() && previous[prefix].command == entries[prefix].command)
        ++prefix;
      for (std::size_t i = 0; i < entries.size(); ++i) {
        ASSERT_TRUE(entries[i].exec);
        if (i < prefix) {
          ASSERT_EQ(entries[i].exec, previous[i].exec);
        } else {
          ASSERT_TRUE(issued.insert(entries[i].exec->value).second) << "reused exec id";
          ASSERT_GT(entries[i].exec->value, 0);
        }
      }
      previous = entries;
      current = std::move(next);
      version = v;
    }
  }
}
