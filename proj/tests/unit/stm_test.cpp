#include <gtest/gtest.h>

#include "asyncdoc/error.hpp"
#include "asyncdoc/stm.hpp"
#include "support.hpp"

using namespace asyncdoc;
using namespace asyncdoc::stm;
using namespace std::chrono_literals;
using asyncdoc::testing::pick;
using asyncdoc::testing::Rng;

namespace {

/// Commands numbered from 1: exec i, command -i.
std::vector<NewCommand> numbered(const std::vector<std::string>& texts, std::int64_t first = 1) {
  std::vector<NewCommand> out;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const auto n = first + static_cast<std::int64_t>(i);
    out.push_back({ExecId(n), CommandId(-n), texts[i]});
  }
  return out;
}

std::vector<wire::Feedback> of_exec(const std::vector<wire::Feedback>& all, std::int64_t exec) {
  std::vector<wire::Feedback> out;
  for (const auto& f : all) {
    if (f.exec_id == ExecId(exec)) out.push_back(f);
  }
  return out;
}

Options with_workers(std::size_t n, std::chrono::milliseconds delay = 0ms) {
  Options o;
  o.workers = n;
  o.prover.tactic_delay = delay;
  return o;
}

bool is_opening(const std::string& t) { return t.rfind("Lemma", 0) == 0; }
bool is_closing(const std::string& t) { return t == "Qed."; }

/// Expected dependency per command: a proof member depends on the command
/// before it; anything else depends on the nearest earlier command that is
/// not a proof member (a statement counts, its proof does not).
std::vector<std::optional<std::size_t>> expected_deps(const std::vector<std::string>& texts) {
  std::vector<bool> member(texts.size(), false);
  bool open = false;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (open) {
      member[i] = true;
      if (is_closing(texts[i])) open = false;
    } else if (is_opening(texts[i])) {
      open = true;
    }
  }
  std::vector<std::optional<std::size_t>> deps(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (member[i]) {
      deps[i] = i - 1;
      continue;
    }
    for (std::size_t j = i; j-- > 0;) {
      if (!member[j]) {
        deps[i] = j;
        break;
      }
    }
  }
  return deps;
}

} // namespace

TEST(Stm, LinearSpineRunsOnObserve) {
  FeedbackQueue q;
  Stm stm(q.sink(), with_workers(2));
  stm.insert_after(std::nullopt, numbered({"Definition a := 1.", "Definition b := a + 1.", "Check b."}));
  EXPECT_TRUE(stm.wait_idle(1s));
  EXPECT_TRUE(q.drain().empty());
  EXPECT_EQ(stm.node(ExecId(3))->status, Status::pending);

  stm.observe(ExecId(3));
  ASSERT_TRUE(stm.wait_idle(5s));
  const auto all = q.drain();
  for (std::int64_t e = 1; e <= 3; ++e) EXPECT_EQ(stm.node(ExecId(e))->status, Status::done);
  EXPECT_EQ(of_exec(all, 3).back().text(), "b := a + 1");
  for (std::size_t i = 1; i < all.size(); ++i) EXPECT_LT(all[i - 1].serial, all[i].serial);
}

TEST(Stm, ObserveIsIdempotent) {
  FeedbackQueue q;
  Stm stm(q.sink(), with_workers(2));
  stm.insert_after(std::nullopt, numbered({"Definition a := 1.", "Check a."}));
  stm.observe(ExecId(2));
  stm.observe(ExecId(2));
  ASSERT_TRUE(stm.wait_idle(5s));
  stm.observe(ExecId(2));
  stm.observe(ExecId(1));
  ASSERT_TRUE(stm.wait_idle(5s));
  EXPECT_EQ(stm.executions(CommandId(-1)), 1u);
  EXPECT_EQ(stm.executions(CommandId(-2)), 1u);
  EXPECT_EQ(stm.total_executions(), 2u);
}

TEST(Stm, ObservePrefixRunsOnlyThePrefix) {
  FeedbackQueue q;
  Stm stm(q.sink(), with_workers(1));
  stm.insert_after(std::nullopt, numbered({"Definition a := 1.", "Definition b := 2.", "Definition c := 3."}));
  stm.observe(ExecId(2));
  ASSERT_TRUE(stm.wait_idle(5s));
  EXPECT_EQ(stm.node(ExecId(2))->status, Status::done);
  EXPECT_EQ(stm.node(ExecId(3))->status, Status::pending);
}

TEST(Stm, UnknownAnchor) {
  Stm stm([](wire::Feedback) {}, with_workers(1));
  stm.insert_after(std::nullopt, numbered({"Definition a := 1."}));
  try {
    stm.insert_after(ExecId(99), {});
    FAIL() << "expected unknown anchor";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::unknown_anchor);
  }
  EXPECT_EQ(stm.spine(), std::vector<ExecId>{ExecId(1)});
}

TEST(Stm, InsertAfterDiscardsTheSuffix) {
  Stm stm([](wire::Feedback) {}, with_workers(1));
  stm.insert_after(std::nullopt, numbered({"Definition a := 1.", "Definition b := 2.", "Definition c := 3."}));
  stm.insert_after(ExecId(1), numbered({"Definition d := 4."}, 4));
  EXPECT_EQ(stm.spine(), (std::vector<ExecId>{ExecId(1), ExecId(4)}));
  EXPECT_FALSE(stm.node(ExecId(2)));
  EXPECT_FALSE(stm.node(ExecId(3)));
  stm.insert_after(std::nullopt, {});
  EXPECT_TRUE(stm.spine().empty());
  stm.observe(ExecId(4));  // unknown now: ignored
  EXPECT_TRUE(stm.wait_idle(1s));
}

TEST(Stm, BranchStructure) {
  Stm stm([](wire::Feedback) {}, with_workers(1));
  stm.insert_after(std::nullopt, numbered({"Definition a := 1.", "Lemma t : a = 1.", "Proof.", "reflexivity.",
                                           "Qed.", "Check t.", "Lemma u : 1 = 1."}));
  const auto branches = stm.branches();
  ASSERT_EQ(branches.size(), 2u);
  EXPECT_EQ(branches[0].opening, ExecId(2));
  EXPECT_EQ(branches[0].body, (std::vector<ExecId>{ExecId(3), ExecId(4)}));
  EXPECT_EQ(branches[0].closing, ExecId(5));
  EXPECT_EQ(branches[1].opening, ExecId(7));
  EXPECT_TRUE(branches[1].body.empty());
  EXPECT_FALSE(branches[1].closing);
  EXPECT_EQ(stm.node(ExecId(6))->deps, std::vector<ExecId>{ExecId(2)});
  EXPECT_EQ(stm.node(ExecId(7))->deps, std::vector<ExecId>{ExecId(6)});
  EXPECT_TRUE(stm.node(ExecId(1))->deps.empty());
}

TEST(StmProperty, DependenciesMatchOracle) {
  Rng rng(21);
  const std::vector<std::string> pool = {"Definition a := 1.", "Lemma t : 1 = 1.", "Proof.", "idtac.",
                                         "reflexivity.", "Qed.", "Check a."};
  for (int round = 0; round < 500; ++round) {
    std::vector<std::string> texts;
    for (std::size_t n = pick(rng, 15); n > 0; --n) texts.push_back(pool[pick(rng, pool.size())]);
    Stm stm([](wire::Feedback) {}, with_workers(1));
    stm.insert_after(std::nullopt, numbered(texts));
    const auto deps = expected_deps(texts);
    for (std::size_t i = 0; i < texts.size(); ++i) {
      std::vector<ExecId> want;
      if (deps[i]) want.push_back(ExecId(static_cast<std::int64_t>(*deps[i]) + 1));
      ASSERT_EQ(stm.node(ExecId(static_cast<std::int64_t>(i) + 1))->deps, want) << "command " << i;
    }
  }
}

TEST(Stm, IncompleteProofFailsOnceAndLaterCommandsSeeTheStatement) {
  FeedbackQueue q;
  Stm stm(q.sink(), with_workers(2));
  stm.insert_after(std::nullopt, numbered({"Lemma app_assoc : 1 + 1 = 2.", "Proof.", "idtac.", "Qed.",
                                           "Lemma use : 2 = 2.", "Proof.", "Check app_assoc.", "reflexivity.",
                                           "Qed."}));
  stm.observe(ExecId(9));
  ASSERT_TRUE(stm.wait_idle(5s));
  const auto all = q.drain();

  std::size_t errors = 0;
  for (const auto& f : all) {
    if (f.kind == wire::FeedbackKind::error) {
      ++errors;
      EXPECT_EQ(f.exec_id, ExecId(4));
      EXPECT_EQ(f.text(), "Error: Attempt to save an incomplete proof");
    }
  }
  EXPECT_EQ(errors, 1u);
  EXPECT_EQ(stm.node(ExecId(4))->status, Status::failed);
  for (std::int64_t e : {5, 6, 7, 8, 9}) EXPECT_EQ(stm.node(ExecId(e))->status, Status::done) << e;
  const auto check = of_exec(all, 7);
  ASSERT_EQ(check.size(), 2u);
  EXPECT_EQ(check[0].kind, wire::FeedbackKind::report);
  EXPECT_EQ(wire::entities_of(check[0]).at(0).def_id, ExecId(1));
  EXPECT_EQ(check[1].text(), "app_assoc : 1 + 1 = 2");
}

TEST(Stm, FailureFailsTheRestOfTheBranchOnly) {
  FeedbackQueue q;
  Stm stm(q.sink(), with_workers(1));
  stm.insert_after(std::nullopt, numbered({"Lemma t : 1 = 2.", "reflexivity.", "idtac.", "Qed.",
                                           "Definition after := 3.", "Check t."}));
  stm.observe(ExecId(6));
  ASSERT_TRUE(stm.wait_idle(5s));
  const auto all = q.drain();

  EXPECT_EQ(of_exec(all, 2).back().text(), "Error: Unable to unify \"1\" with \"2\".");
  EXPECT_EQ(of_exec(all, 3).back().text(), "Error: Not executed: depends on failed execution 2");
  EXPECT_EQ(of_exec(all, 4).back().text(), "Error: Not executed: depends on failed execution 3");
  EXPECT_EQ(stm.executions(CommandId(-3)), 0u);
  EXPECT_EQ(stm.node(ExecId(5))->status, Status::done);
  EXPECT_EQ(of_exec(all, 6).back().text(), "t : 1 = 2");
}

TEST(Stm, ObservingPastAProofRunsTheProof) {
  FeedbackQueue q;
  Stm stm(q.sink(), with_workers(1));
  stm.insert_after(std::nullopt, numbered({"Lemma t : 1 = 1.", "reflexivity.", "Qed.", "Check t."}));
  stm.observe(ExecId(4));
  ASSERT_TRUE(stm.wait_idle(5s));
  for (std::int64_t e = 1; e <= 4; ++e) EXPECT_EQ(stm.node(ExecId(e))->status, Status::done);
  EXPECT_EQ(of_exec(q.drain(), 3).back().text(), "t is defined");
}

TEST(Stm, EveryObservedCommandReportsOnce) {
  Rng rng(22);
  const std::vector<std::string> pool = {"Definition a := 1.", "Lemma t : 1 = 1.", "Proof.", "idtac.",
                                         "reflexivity.", "Qed.", "Check a.", "bogus."};
  for (int round = 0; round < 100; ++round) {
    std::vector<std::string> texts;
    for (std::size_t n = 1 + pick(rng, 12); n > 0; --n) texts.push_back(pool[pick(rng, pool.size())]);
    FeedbackQueue q;
    Stm stm(q.sink(), with_workers(1 + pick(rng, 3)));
    stm.insert_after(std::nullopt, numbered(texts));
    stm.observe(ExecId(static_cast<std::int64_t>(texts.size())));
    ASSERT_TRUE(stm.wait_idle(5s));
    const auto all = q.drain();
    const auto deps = expected_deps(texts);
    // The observed command and its dependency chain each end with exactly one writeln or error.
    std::optional<std::size_t> i = texts.size() - 1;
    while (i) {
      const auto mine = of_exec(all, static_cast<std::int64_t>(*i) + 1);
      std::size_t terminal = 0;
      for (const auto& f : mine) terminal += f.kind != wire::FeedbackKind::report;
      ASSERT_EQ(terminal, 1u) << "command " << *i;
      i = deps[*i];
    }
  }
}

TEST(Stm, DiscardedWorkReportsNothing) {
  FeedbackQueue q;
  Stm stm(q.sink(), with_workers(1, 100ms));
  stm.insert_after(std::nullopt, numbered({"Lemma t : 1 = 1.", "idtac."}));
  stm.observe(ExecId(2));
  std::this_thread::sleep_for(40ms);
  stm.insert_after(ExecId(1), {});
  ASSERT_TRUE(stm.wait_idle(5s));
  EXPECT_TRUE(of_exec(q.drain(), 2).empty());
}

TEST(Stm, IndependentProofsOverlap) {
  Stm stm([](wire::Feedback) {}, with_workers(2, 100ms));
  stm.insert_after(std::nullopt, numbered({"Lemma a : 1 = 1.", "idtac.", "idtac.", "Qed.", "Lemma b : 2 = 2.",
                                           "idtac.", "idtac.", "Qed."}));
  const auto begin = Clock::now();
  stm.observe(ExecId(8));
  ASSERT_TRUE(stm.wait_idle(5s));
  const auto elapsed = Clock::now() - begin;

  std::optional<ExecEvent> first;
  std::optional<ExecEvent> second;
  for (const auto& e : stm.events()) {
    if (e.exec == ExecId(2)) first = e;
    if (e.exec == ExecId(6)) second = e;
  }
  ASSERT_TRUE(first && second);
  EXPECT_LT(second->start, first->end);
  EXPECT_LT(first->start, second->end);
  EXPECT_LT(elapsed, 390ms);
}

TEST(Stm, NewBranchMembersUnderAKeptStatementRun) {
  FeedbackQueue q;
  Stm stm(q.sink(), with_workers(2));
  stm.insert_after(std::nullopt, numbered({"Lemma t : 1 = 1.", "Qed."}));
  stm.observe(ExecId(2));
  ASSERT_TRUE(stm.wait_idle(5s));
  stm.insert_after(ExecId(1), numbered({"idtac.", "reflexivity.", "Qed.", "Check t."}, 3));
  stm.observe(ExecId(6));
  ASSERT_TRUE(stm.wait_idle(5s));
  for (std::int64_t e = 3; e <= 6; ++e) EXPECT_EQ(stm.node(ExecId(e))->status, Status::done) << e;
}
