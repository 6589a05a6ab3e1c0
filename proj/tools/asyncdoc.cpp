// asyncdoc: replay edit scripts, serve the WebSocket bridge, or run a TCP prover.

#include <csignal>
#include <fstream>
#include <iostream>
#include <list>
#include <memory>
#include <thread>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "asyncdoc/bridge.hpp"
#include "asyncdoc/channel.hpp"
#include "asyncdoc/error.hpp"
#include "asyncdoc/log.hpp"
#include "asyncdoc/prover.hpp"
#include "asyncdoc/script.hpp"

using namespace asyncdoc;

namespace {

struct Common {
  std::size_t workers = stm::default_worker_count();
  bool deterministic = false;

  prover::ProverOptions prover() const {
    prover::ProverOptions options;
    options.workers = deterministic ? 1 : std::max<std::size_t>(workers, 1);
    return options;
  }
};

void add_common(CLI::App& app, Common& common) {
  app.add_option("--workers", common.workers, "Worker threads per prover")->check(CLI::PositiveNumber);
  app.add_flag("--deterministic", common.deterministic, "Single worker, stable serials");
}

int run_command(const std::string& path, const Common& common, const std::optional<std::string>& connect,
                const std::optional<std::string>& trace_path, const std::string& node, int timeout_ms) {
  std::vector<script::Step> steps;
  try {
    steps = script::load_script(path);
  } catch (const Error& e) {
    std::cerr << "asyncdoc: " << e.what() << '\n';
    return script::exit_code::script_error;
  }

  std::ofstream trace_file;
  script::EngineOptions options;
  options.prover = common.prover();
  options.node = node;
  options.connect = connect;
  if (trace_path) {
    trace_file.open(*trace_path);
    if (!trace_file) {
      std::cerr << "asyncdoc: cannot write " << *trace_path << '\n';
      return script::exit_code::script_error;
    }
    options.trace = &trace_file;
  }

  script::RunResult result;
  try {
    script::Engine engine(options);
    result = script::run_steps(engine, steps, std::chrono::milliseconds(timeout_ms));
  } catch (const Error& e) {
    std::cerr << "asyncdoc: " << e.what() << '\n';
    return script::exit_code::transport_error;
  }
  if (result.exit_code != script::exit_code::ok) {
    std::cerr << "asyncdoc: " << result.error << '\n';
    return result.exit_code;
  }
  std::cout << result.report.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
  return script::exit_code::ok;
}

void wait_for_signal() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  int sig = 0;
  sigwait(&set, &sig);
}

void block_signals() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
}

int serve_command(const bridge::ServeOptions& options) {
  block_signals();
  try {
    bridge::Server server(options);
    std::cerr << "asyncdoc: serving on ws://" << options.host << ':' << server.port() << "/\n";
    server.start();
    wait_for_signal();
    server.stop();
  } catch (const Error& e) {
    std::cerr << "asyncdoc: " << e.what() << '\n';
    return e.code() == ErrorCode::address_in_use ? script::exit_code::address_in_use
                                                 : script::exit_code::transport_error;
  }
  return 0;
}

int prover_command(const std::string& host, std::uint16_t port, const Common& common) {
  block_signals();
  try {
    wire::TcpListener listener(host, port);
    std::cerr << "asyncdoc: prover listening on " << host << ':' << listener.port() << '\n';
    std::thread acceptor([&] {
      struct Peer {
        std::unique_ptr<wire::Channel> channel;
        std::unique_ptr<prover::ProverEngine> engine;
      };
      std::list<Peer> peers;
      for (;;) {
        std::shared_ptr<wire::TcpStream> stream;
        try {
          stream = listener.accept();
        } catch (const Error&) {
          break;
        }
        Peer peer;
        peer.channel = wire::make_tcp_channel(stream);
        peer.engine = std::make_unique<prover::ProverEngine>(*peer.channel, common.prover());
        peer.engine->start();
        peers.push_back(std::move(peer));
      }
    });
    wait_for_signal();
    listener.close();
    acceptor.join();
  } catch (const Error& e) {
    std::cerr << "asyncdoc: " << e.what() << '\n';
    return e.code() == ErrorCode::address_in_use ? script::exit_code::address_in_use
                                                 : script::exit_code::transport_error;
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  init_logging();

  CLI::App app{"Asynchronous document-oriented prover interaction"};
  app.require_subcommand(1);

  Common common;

  auto* run = app.add_subcommand("run", "Replay an edit script and print the final report");
  std::string script_path;
  std::optional<std::string> connect;
  std::optional<std::string> trace_path;
  std::string node = "foo.v";
  int timeout_ms = 30000;
  run->add_option("script", script_path, "Edit script (one JSON step per line)")->required();
  run->add_option("--connect", connect, "Remote prover host:port (default: in-process)");
  run->add_option("--trace", trace_path, "Write protocol trace records (JSON lines)");
  run->add_option("--node", node, "Document node name");
  run->add_option("--timeout", timeout_ms, "Quiescence timeout in milliseconds")->check(CLI::PositiveNumber);
  add_common(*run, common);

  auto* serve = app.add_subcommand("serve", "Serve the WebSocket bridge");
  bridge::ServeOptions serve_options;
  serve->add_option("--port", serve_options.port, "Listening port")->required();
  serve->add_option("--host", serve_options.host, "Listening address");
  serve->add_option("--static", serve_options.static_dir, "Directory of static client files");
  serve->add_option("--node", serve_options.node, "Document node name");
  add_common(*serve, common);

  auto* prover = app.add_subcommand("prover", "Run a prover that accepts TCP editor connections");
  std::uint16_t prover_port = 0;
  std::string prover_host = "127.0.0.1";
  prover->add_option("--port", prover_port, "Listening port")->required();
  prover->add_option("--host", prover_host, "Listening address");
  add_common(*prover, common);

  CLI11_PARSE(app, argc, argv);

  if (*run) return run_command(script_path, common, connect, trace_path, node, timeout_ms);
  if (*serve) {
    serve_options.prover = common.prover();
    return serve_command(serve_options);
  }
  return prover_command(prover_host, prover_port, common);
}
