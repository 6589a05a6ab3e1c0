#include "asyncdoc/script.hpp"

#include <fstream>

#include <spdlog/spdlog.h>

#include "asyncdoc/error.hpp"

namespace asyncdoc::script {

using nlohmann::json;

namespace {

[[noreturn]] void bad_line(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::script_parse, "line " + std::to_string(line) + ": " + what);
}

Step parse_step(const json& value, std::size_t line) {
  if (!value.is_object() || value.size() != 1) bad_line(line, "expected an object with exactly one step");
  const auto& [key, body] = *value.items().begin();
  if (!body.is_object()) bad_line(line, "step body must be an object");
  Step step;
  try {
    if (key == "insert") {
      step.kind = Step::Kind::insert;
      step.offset = body.at("offset").get<std::size_t>();
      step.text = body.at("text").get<std::string>();
    } else if (key == "remove") {
      step.kind = Step::Kind::remove;
      step.offset = body.at("offset").get<std::size_t>();
      step.length = body.at("length").get<std::size_t>();
    } else if (key == "await_quiescent") {
      step.kind = Step::Kind::await_quiescent;
    } else if (key == "query") {
      step.kind = Step::Kind::query;
      step.offset = body.at("offset").get<std::size_t>();
    } else {
      bad_line(line, "unknown step " + key);
    }
  } catch (const json::exception& e) {
    bad_line(line, e.what());
  }
  return step;
}

json region_json(const session::Region& r) { return {{"start", r.start}, {"end", r.end}}; }

json errors_json(const std::vector<session::ErrorMark>& errors) {
  json out = json::array();
  for (const auto& e : errors) out.push_back({{"start", e.region.start}, {"end", e.region.end}, {"message", e.message}});
  return out;
}

json links_json(const std::vector<session::Link>& links) {
  json out = json::array();
  for (const auto& l : links) {
    json item{{"start", l.use.start},
              {"end", l.use.end},
              {"name", l.name},
              {"kind", l.kind},
              {"def_exec", l.def_exec.value},
              {"def_offset", l.def_offset},
              {"def_end_offset", l.def_end_offset},
              {"target_command", nullptr},
              {"target", nullptr}};
    if (l.target_command) item["target_command"] = l.target_command->value;
    if (l.target) item["target"] = region_json(*l.target);
    out.push_back(std::move(item));
  }
  return out;
}

} // namespace

std::vector<Step> parse_script(std::istream& in) {
  std::vector<Step> steps;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json value;
    try {
      value = json::parse(text);
    } catch (const json::parse_error& e) {
      bad_line(line, e.what());
    }
    steps.push_back(parse_step(value, line));
  }
  return steps;
}

std::vector<Step> load_script(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::script_parse, "cannot open " + path);
  return parse_script(in);
}

json to_json(const Step& step) {
  switch (step.kind) {
  case Step::Kind::insert: return {{"insert", {{"offset", step.offset}, {"text", step.text}}}};
  case Step::Kind::remove: return {{"remove", {{"offset", step.offset}, {"length", step.length}}}};
  case Step::Kind::await_quiescent: return {{"await_quiescent", json::object()}};
  case Step::Kind::query: return {{"query", {{"offset", step.offset}}}};
  }
  return {};
}

Engine::Engine(EngineOptions options) : recorder_(std::make_unique<trace::Recorder>(options.trace)) {
  if (options.connect) {
    const auto& target = *options.connect;
    const auto colon = target.rfind(':');
    if (colon == std::string::npos) throw Error(ErrorCode::transport, "expected host:port, got " + target);
    int port = 0;
    try {
      port = std::stoi(target.substr(colon + 1));
    } catch (const std::exception&) {
      throw Error(ErrorCode::transport, "bad port in " + target);
    }
    if (port <= 0 || port > 65535) throw Error(ErrorCode::transport, "bad port in " + target);
    editor_channel_ = wire::make_tcp_channel(wire::tcp_connect(target.substr(0, colon), static_cast<std::uint16_t>(port)));
  } else {
    auto [editor, prover] = wire::make_channel_pair();
    editor_channel_ = std::move(editor);
    prover_channel_ = std::move(prover);
    prover_ = std::make_unique<prover::ProverEngine>(*prover_channel_, options.prover);
    prover_->start();
  }
  recorder_->attach(*editor_channel_);
  session_ = std::make_unique<session::Session>(*editor_channel_, session::SessionOptions{options.node, nullptr});
  session_->start();
}

Engine::~Engine() {
  session_.reset();
  prover_.reset();
}

json spans_report(const session::Snapshot& snapshot) {
  json out = json::array();
  for (std::size_t i = 0; i < snapshot.spans.size(); ++i) {
    const auto& span = snapshot.spans[i];
    const auto result = snapshot.query_span(i);
    json states = json::array();
    for (const auto& f : snapshot.feedback_of(i)) {
      if (f.kind == wire::FeedbackKind::writeln) states.push_back(f.text());
    }
    out.push_back({{"offset", span.region.start},
                   {"text", span.text},
                   {"command_id", span.id.value},
                   {"exec_id", span.exec ? json(span.exec->value) : json(nullptr)},
                   {"status", session::to_string(span.status)},
                   {"states", std::move(states)},
                   {"errors", errors_json(result.errors)},
                   {"links", links_json(result.links)}});
  }
  return out;
}

json query_report(const session::Snapshot& snapshot, std::size_t offset) {
  const auto index = snapshot.span_at(offset);
  const auto result = snapshot.query(offset);
  return {{"offset", offset},
          {"span", index ? json(*index) : json(nullptr)},
          {"state", result.state_text ? json(*result.state_text) : json(nullptr)},
          {"errors", errors_json(result.errors)},
          {"links", links_json(result.links)}};
}

RunResult run_steps(Engine& engine, const std::vector<Step>& steps, std::chrono::milliseconds quiescence_timeout) {
  RunResult result;
  result.report = {{"spans", json::array()}, {"queries", json::array()}};
  auto& session = engine.session();
  auto await = [&] {
    if (session.await_quiescent(quiescence_timeout)) return true;
    result.exit_code = exit_code::transport_error;
    result.error = session.disconnected() ? "prover connection lost" : "timed out waiting for quiescence";
    return false;
  };

  try {
    for (const auto& step : steps) {
      switch (step.kind) {
      case Step::Kind::insert: session.edit_buffer({spans::TextEdit::insert(step.offset, step.text)}); break;
      case Step::Kind::remove: session.edit_buffer({spans::TextEdit::remove(step.offset, step.length)}); break;
      case Step::Kind::await_quiescent:
        if (!await()) return result;
        break;
      case Step::Kind::query: {
        const auto snapshot = session.snapshot();
        if (step.offset > snapshot->text.size()) {
          throw Error(ErrorCode::out_of_bounds, "query offset " + std::to_string(step.offset) + " past end of buffer");
        }
        result.report["queries"].push_back(query_report(*snapshot, step.offset));
        break;
      }
      }
    }
  } catch (const Error& e) {
    result.error = e.what();
    result.exit_code = e.code() == ErrorCode::out_of_bounds ? exit_code::script_error : exit_code::transport_error;
    return result;
  }
  if (!await()) return result;
  result.report["spans"] = spans_report(*session.snapshot());
  return result;
}

} // namespace asyncdoc::script
