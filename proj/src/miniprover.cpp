#include "asyncdoc/miniprover.hpp"

#include <cctype>
#include <thread>

namespace asyncdoc::miniprover {

namespace {

enum class TokenKind { ident, number, symbol, end };

struct Token {
  TokenKind kind = TokenKind::end;
  std::string text;
  std::size_t offset = 0;  // 0-based
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (text.substr(i, 2) == "(*") {
      int depth = 0;
      while (i < text.size()) {
        if (text.substr(i, 2) == "(*") {
          ++depth;
          i += 2;
        } else if (text.substr(i, 2) == "*)") {
          i += 2;
          if (--depth == 0) break;
        } else {
          ++i;
        }
      }
    } else if (ident_start(c)) {
      const std::size_t start = i;
      while (i < text.size() && ident_char(text[i])) ++i;
      out.push_back({TokenKind::ident, std::string(text.substr(start, i - start)), start});
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      const std::size_t start = i;
      while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
      out.push_back({TokenKind::number, std::string(text.substr(start, i - start)), start});
    } else if (text.substr(i, 2) == ":=") {
      out.push_back({TokenKind::symbol, ":=", i});
      i += 2;
    } else {
      out.push_back({TokenKind::symbol, std::string(1, c), i});
      ++i;
    }
  }
  out.push_back({TokenKind::end, "", text.size()});
  return out;
}

bool is_keyword(std::string_view word) {
  return word == "Definition" || word == "Lemma" || word == "Proof" || word == "Qed" || word == "Check" ||
         word == "idtac" || word == "reflexivity";
}

/// Command failure; becomes error feedback.
struct Failure {
  std::string message;
  std::optional<std::size_t> offset;  // 0-based
  std::size_t length = 0;
};

[[noreturn]] void fail(std::string message) { throw Failure{std::move(message), std::nullopt, 0}; }
[[noreturn]] void fail_at(std::string message, const Token& token) {
  throw Failure{std::move(message), token.offset, std::max<std::size_t>(token.text.size(), 1)};
}

class Parser {
public:
  Parser(const std::vector<Token>& tokens, const Environment& env) : tokens_(tokens), env_(env) {}

  const Token& peek() const { return tokens_[pos_]; }
  const Token& next() { return tokens_[pos_ < tokens_.size() - 1 ? pos_++ : pos_]; }

  bool accept(std::string_view symbol) {
    if (peek().kind == TokenKind::symbol && peek().text == symbol) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(std::string_view symbol) {
    if (!accept(symbol)) fail_at("Error: Syntax error: '" + std::string(symbol) + "' expected", peek());
  }

  const Token& binder() {
    const Token& t = next();
    if (t.kind != TokenKind::ident || is_keyword(t.text)) fail_at("Error: Syntax error: name expected", t);
    return t;
  }

  void finish() {
    expect(".");
    if (peek().kind != TokenKind::end) fail_at("Error: Syntax error: end of command expected", peek());
  }

  /// Parses an expression, returning its value and display text.
  std::pair<std::int64_t, std::string> expression() {
    std::string text;
    const auto value = sum(text);
    return {value, text};
  }

private:
  std::int64_t sum(std::string& text) {
    auto value = product(text);
    while (accept("+")) {
      text += " + ";
      const auto rhs = product(text);
      if (__builtin_add_overflow(value, rhs, &value)) fail("Error: Arithmetic overflow");
    }
    return value;
  }

  std::int64_t product(std::string& text) {
    auto value = atom(text);
    while (accept("*")) {
      text += " * ";
      const auto rhs = atom(text);
      if (__builtin_mul_overflow(value, rhs, &value)) fail("Error: Arithmetic overflow");
    }
    return value;
  }

  std::int64_t atom(std::string& text) {
    const Token& t = next();
    if (t.kind == TokenKind::number) {
      std::int64_t value = 0;
      for (char c : t.text) {
        if (__builtin_mul_overflow(value, 10, &value) || __builtin_add_overflow(value, c - '0', &value)) {
          fail_at("Error: Arithmetic overflow", t);
        }
      }
      text += t.text;
      return value;
    }
    if (t.kind == TokenKind::ident && !is_keyword(t.text)) {
      auto it = env_.find(t.text);
      if (it == env_.end()) {
        fail_at("Error: The reference " + t.text + " was not found in the current environment.", t);
      }
      if (it->second.kind != EntryKind::def) fail_at("Error: " + t.text + " is a theorem, not a definition.", t);
      text += t.text;
      return it->second.value;
    }
    if (t.kind == TokenKind::symbol && t.text == "(") {
      text += "(";
      const auto value = sum(text);
      expect(")");
      text += ")";
      return value;
    }
    fail_at("Error: Syntax error: expression expected", t);
  }

  const std::vector<Token>& tokens_;
  const Environment& env_;
  std::size_t pos_ = 0;
};

void check_fresh(const Environment& env, const Token& name) {
  if (env.contains(name.text)) fail_at("Error: " + name.text + " already exists.", name);
}

Proof& require_proof(ProverState& state) {
  if (!state.proof) fail("Error: No focused proof.");
  return *state.proof;
}

std::string goal_count(std::size_t n) {
  return std::to_string(n) + (n == 1 ? " subgoal" : " subgoals");
}

EnvEntry bind(EntryKind kind, std::string statement, std::int64_t value, ExecId exec, const Token& name) {
  const auto begin = static_cast<std::int64_t>(name.offset) + 1;
  return {kind, std::move(statement), value, exec, begin, begin + static_cast<std::int64_t>(name.text.size())};
}

/// Runs the command on `state` in place; returns the writeln text.
std::string run(ProverState& state, std::string_view text, ExecId exec, const Options& options) {
  const auto tokens = tokenize(text);
  Parser p(tokens, state.env);
  const Token& head = p.peek();
  if (head.kind == TokenKind::end) return render_state(state);
  if (head.kind != TokenKind::ident || !is_keyword(head.text)) fail("Error: Unknown command");
  p.next();

  const std::string& keyword = head.text;
  if (keyword == "Definition") {
    const Token& name = p.binder();
    p.expect(":=");
    auto [value, expr] = p.expression();
    p.finish();
    if (state.proof) fail("Error: Command not allowed inside a proof.");
    check_fresh(state.env, name);
    state.env.emplace(name.text, bind(EntryKind::def, expr, value, exec, name));
    return name.text + " is defined";
  }
  if (keyword == "Lemma") {
    const Token& name = p.binder();
    p.expect(":");
    auto [lhs, lhs_text] = p.expression();
    p.expect("=");
    auto [rhs, rhs_text] = p.expression();
    p.finish();
    if (state.proof) fail("Error: Nested proofs are not allowed.");
    check_fresh(state.env, name);
    Goal goal{lhs_text + " = " + rhs_text, lhs, rhs};
    state.env.emplace(name.text, bind(EntryKind::thm, goal.text, 0, exec, name));
    state.proof = Proof{name.text, {goal}};
    return render_state(state);
  }
  if (keyword == "Proof") {
    p.finish();
    require_proof(state);
    return render_state(state);
  }
  if (keyword == "idtac" || keyword == "reflexivity") {
    p.finish();
    auto& proof = require_proof(state);
    if (options.tactic_delay.count() > 0) std::this_thread::sleep_for(options.tactic_delay);
    if (keyword == "reflexivity") {
      if (proof.goals.empty()) fail("Error: No such goal.");
      const auto& goal = proof.goals.front();
      if (goal.lhs != goal.rhs) {
        fail("Error: Unable to unify \"" + std::to_string(goal.lhs) + "\" with \"" + std::to_string(goal.rhs) +
             "\".");
      }
      proof.goals.erase(proof.goals.begin());
    }
    return render_state(state);
  }
  if (keyword == "Qed") {
    p.finish();
    if (!state.proof) fail("Error: No proof in progress.");
    if (!state.proof->goals.empty()) fail("Error: Attempt to save an incomplete proof");
    const std::string name = state.proof->name;
    state.proof.reset();
    return name + " is defined";
  }
  // Check
  const Token& name = p.next();
  if (name.kind != TokenKind::ident) fail_at("Error: Syntax error: name expected", name);
  p.finish();
  auto it = state.env.find(name.text);
  if (it == state.env.end()) {
    fail_at("Error: The reference " + name.text + " was not found in the current environment.", name);
  }
  const auto& entry = it->second;
  return entry.kind == EntryKind::thm ? name.text + " : " + entry.statement
                                      : name.text + " := " + entry.statement;
}

} // namespace

std::string_view to_string(EntryKind kind) { return kind == EntryKind::thm ? "thm" : "def"; }

std::string render_state(const ProverState& state) {
  if (!state.proof) return {};
  const auto& goals = state.proof->goals;
  if (goals.empty()) return "No more subgoals.";
  std::string out = goal_count(goals.size()) + "\n";
  out += std::string(28, '=') + "\n";
  out += " " + goals.front().text;
  for (std::size_t i = 1; i < goals.size(); ++i) {
    out += "\n\nsubgoal " + std::to_string(i + 1) + " is:\n " + goals[i].text;
  }
  return out;
}

CommandShape classify(std::string_view text) {
  const auto tokens = tokenize(text);
  const auto& head = tokens.front();
  if (head.kind != TokenKind::ident) return CommandShape::plain;
  if (head.text == "Lemma") return CommandShape::opening;
  if (head.text == "Qed") return CommandShape::closing;
  return CommandShape::plain;
}

std::vector<wire::Feedback> entity_report(const Environment& env, std::string_view text, ExecId exec) {
  const auto tokens = tokenize(text);
  std::optional<std::size_t> binder;
  if (tokens.size() > 1 && tokens[0].kind == TokenKind::ident &&
      (tokens[0].text == "Definition" || tokens[0].text == "Lemma")) {
    binder = 1;
  }
  std::vector<wire::Feedback> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& t = tokens[i];
    if (t.kind != TokenKind::ident || binder == i) continue;
    auto it = env.find(t.text);
    if (it == env.end()) continue;
    const auto& entry = it->second;
    wire::Entity e;
    e.def_id = entry.def_id;
    e.id = exec;
    e.offset = static_cast<std::int64_t>(t.offset) + 1;
    e.end_offset = e.offset + static_cast<std::int64_t>(t.text.size());
    e.def_offset = entry.def_offset;
    e.def_end_offset = entry.def_end_offset;
    e.name = t.text;
    e.kind = std::string(to_string(entry.kind));
    out.push_back(wire::make_entity_report(e));
  }
  return out;
}

Outcome exec_command(const ProverState& state, std::string_view text, ExecId exec, const Options& options) {
  Outcome out;
  out.feedback = entity_report(state.env, text, exec);
  ProverState next = state;
  try {
    const auto message = run(next, text, exec, options);
    out.state = std::move(next);
    out.feedback.push_back(wire::make_text_feedback(wire::FeedbackKind::writeln, exec, message));
  } catch (const Failure& failure) {
    out.ok = false;
    out.state = state;
    auto error = wire::make_text_feedback(wire::FeedbackKind::error, exec, failure.message);
    if (failure.offset) {
      error.offset = static_cast<std::int64_t>(*failure.offset) + 1;
      error.end_offset = *error.offset + static_cast<std::int64_t>(failure.length);
    }
    out.feedback.push_back(std::move(error));
  }
  return out;
}

} // namespace asyncdoc::miniprover
