// Command-line front end: headless runs, the WebSocket service, static
// checks and trace utilities.
//
// Exit codes: 0 success, 1 timeout (or traces differ), 2 invalid input,
// 3 runtime failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "slp/error.hpp"
#include "slp/lint.hpp"
#include "slp/session.hpp"
#include "slp/ws_server.hpp"

namespace fs = std::filesystem;
using namespace slp;
using namespace slp::json_util;

namespace {

constexpr int kExitTimeout = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitRuntime = 3;

struct Inputs {
  std::string fixture;
  std::string scenario;
  std::string program;
  std::string script;

  // A fixture directory supplies whichever files were not given.
  void resolve() {
    if (fixture.empty()) return;
    const fs::path dir(fixture);
    auto pick = [&](std::string& slot, const char* name) {
      if (slot.empty() && fs::exists(dir / name)) slot = (dir / name).string();
    };
    pick(scenario, "scenario.json");
    pick(program, "program.json");
    pick(script, "script.json");
  }

  std::shared_ptr<const Scenario> load_scenario() const {
    if (scenario.empty()) throw ValidationError({"no scenario given (--scenario or --fixture)"});
    return std::make_shared<const Scenario>(load_scenario_file(scenario));
  }
  Program load_program() const {
    if (program.empty()) return {};
    return Program::from_json(parse_document(read_file(program)));
  }
  HumanScript load_script() const {
    if (script.empty()) return {};
    return load_script_file(script);
  }
};

void add_inputs(CLI::App* cmd, Inputs& in, bool with_script) {
  cmd->add_option("-f,--fixture", in.fixture, "Directory with scenario/program/script JSON");
  cmd->add_option("-s,--scenario", in.scenario, "Scenario file");
  cmd->add_option("-p,--program", in.program, "Program file");
  if (with_script) cmd->add_option("--script", in.script, "Scripted human actions");
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

ExecutionTrace read_trace(const std::string& path) {
  return ExecutionTrace::parse(read_file(path));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatial rule programming for a collaborative robot"};
  app.require_subcommand(1);

  // run
  Inputs run_in;
  std::string trace_out;
  int tick_ms = 500;
  bool realtime = false;
  std::uint64_t seed = 0;
  std::int64_t max_ticks = 10000;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Run a scenario headless and record its trace");
  add_inputs(run, run_in, true);
  run->add_option("-o,--trace,--trace-out", trace_out, "Write the trace (JSON lines) here");
  run->add_option("--tick-ms", tick_ms, "Tick period in milliseconds")
      ->check(CLI::PositiveNumber);
  auto* realtime_flag = run->add_flag("--realtime", realtime, "Pace ticks by the wall clock");
  run->add_flag("--stepped", "Run ticks back to back (default)")->excludes(realtime_flag);
  run->add_option("--seed", seed, "Perception noise seed");
  run->add_option("--max-ticks", max_ticks, "Tick budget")->check(CLI::PositiveNumber);
  run->add_flag("-q,--quiet", quiet, "Print only the digest");

  // serve
  std::vector<std::string> serve_fixtures;
  std::vector<std::string> serve_scenarios;
  std::string host = "127.0.0.1";
  unsigned short port = 8765;
  int serve_tick_ms = 500;
  auto* serve = app.add_subcommand("serve", "Serve live sessions over WebSocket");
  serve->add_option("-f,--fixture", serve_fixtures, "Fixture directory (repeatable)");
  serve->add_option("-s,--scenario", serve_scenarios, "Scenario file (repeatable)");
  serve->add_option("--host", host, "Address to bind");
  serve->add_option("--port", port, "Port to bind (0 picks one)");
  serve->add_option("--tick-ms", serve_tick_ms, "Tick period in milliseconds")
      ->check(CLI::PositiveNumber);

  // lint
  Inputs lint_in;
  std::string format = "text";
  auto* lint = app.add_subcommand("lint", "Report chains, conflicts and self-retriggering rules");
  add_inputs(lint, lint_in, false);
  lint->add_option("--format", format, "Output format")
      ->check(CLI::IsMember({"text", "json"}));

  // trace
  auto* trace = app.add_subcommand("trace", "Trace utilities");
  trace->require_subcommand(1);
  std::string digest_path;
  auto* digest = trace->add_subcommand("digest", "Print the SHA-256 digest of a trace file");
  digest->add_option("file", digest_path)->required();
  std::string diff_a, diff_b;
  auto* diff = trace->add_subcommand("diff", "Show the first difference between two traces");
  diff->add_option("a", diff_a)->required();
  diff->add_option("b", diff_b)->required();

  // validate
  Inputs val_in;
  auto* validate = app.add_subcommand("validate", "Check scenario, program and script files");
  add_inputs(validate, val_in, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  try {
    if (*run) {
      run_in.resolve();
      SessionConfig config;
      config.tick_period = std::chrono::milliseconds(tick_ms);
      config.mode = realtime ? ClockMode::realtime : ClockMode::stepped;
      config.seed = seed;
      config.max_ticks = max_ticks;
      auto result = run_headless(run_in.load_scenario(), run_in.load_program(),
                                 run_in.load_script(), config);
      if (!trace_out.empty()) write_file(trace_out, result.trace.serialize());
      const std::string hex = trace_digest(result.trace);
      if (quiet) {
        std::cout << hex << '\n';
      } else {
        std::cout << "ticks:     " << result.ticks << '\n'
                  << "events:    " << result.trace.size() << '\n'
                  << "completed: " << result.trace.count(EventKind::ActionCompleted) << '\n'
                  << "aborted:   " << result.trace.count(EventKind::ActionAborted) << '\n'
                  << "conflicts: " << result.trace.count(EventKind::ConflictRaised) << '\n'
                  << "warnings:  " << result.trace.count(EventKind::Warning) << '\n'
                  << "digest:    " << hex << '\n';
        if (result.timed_out) std::cout << "timed out after " << max_ticks << " ticks\n";
      }
      return result.timed_out ? kExitTimeout : 0;
    }

    if (*serve) {
      SessionConfig config;
      config.tick_period = std::chrono::milliseconds(serve_tick_ms);
      config.mode = ClockMode::realtime;
      SessionHub hub(config);
      for (const auto& dir : serve_fixtures) {
        Inputs in{dir, "", "", ""};
        in.resolve();
        // Sessions start with an empty program; clients author or load one.
        hub.add_scenario(in.load_scenario());
      }
      for (const auto& file : serve_scenarios) {
        hub.add_scenario(std::make_shared<const Scenario>(load_scenario_file(file)));
      }
      if (hub.scenario_names().empty()) throw ValidationError({"nothing to serve"});
      WsServer server(hub, host, port);
      std::cout << "listening on ws://" << host << ":" << server.port() << std::endl;
      server.run();
      hub.stop_all();
      return 0;
    }

    if (*lint) {
      lint_in.resolve();
      const auto scenario = lint_in.load_scenario();
      const auto report = lint_program(lint_in.load_program(), *scenario);
      if (format == "json") {
        std::cout << lint_json(report).dump(2) << '\n';
      } else {
        std::cout << lint_text(report);
      }
      return 0;
    }

    if (*digest) {
      std::cout << trace_digest(read_trace(digest_path)) << '\n';
      return 0;
    }

    if (*diff) {
      const auto a = read_trace(diff_a);
      const auto b = read_trace(diff_b);
      const auto& ea = a.events();
      const auto& eb = b.events();
      for (std::size_t i = 0; i < std::max(ea.size(), eb.size()); ++i) {
        if (i < ea.size() && i < eb.size() && ea[i] == eb[i]) continue;
        std::cout << "traces differ at event " << i + 1 << '\n';
        std::cout << "< " << (i < ea.size() ? canonical_line(ea[i]) : "(end of trace)") << '\n';
        std::cout << "> " << (i < eb.size() ? canonical_line(eb[i]) : "(end of trace)") << '\n';
        return 1;
      }
      std::cout << "traces are identical (" << ea.size() << " events)\n";
      return 0;
    }

    if (*validate) {
      val_in.resolve();
      const auto scenario = val_in.load_scenario();
      const auto program = val_in.load_program();
      if (auto issues = program.validate(*scenario); !issues.empty()) {
        throw ValidationError(std::move(issues));
      }
      const auto script = val_in.load_script();
      std::cout << "ok: scenario '" << scenario->name << "', " << scenario->initial_objects.size()
                << " objects, " << program.rules().size() << " rules, " << script.steps.size()
                << " script steps\n";
      return 0;
    }
  } catch (const ValidationError& e) {
    std::cerr << "invalid: " << e.what() << '\n';
    for (const auto& issue : e.issues()) std::cerr << "  - " << issue << '\n';
    return kExitInvalid;
  } catch (const ParseError& e) {
    std::cerr << "invalid: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const ReferenceError& e) {
    std::cerr << "invalid: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
