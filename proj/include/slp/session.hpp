#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stop_token>
#include <string>
#include <vector>

#include "slp/binding.hpp"
#include "slp/commands.hpp"
#include "slp/conflict.hpp"
#include "slp/executor.hpp"
#include "slp/program.hpp"
#include "slp/script.hpp"
#include "slp/trace.hpp"
#include "slp/world.hpp"

namespace slp {

enum class ClockMode { stepped, realtime };

struct SessionConfig {
  std::chrono::milliseconds tick_period{500};
  /// stepped: ticks run back to back and every primitive takes one tick.
  /// realtime: ticks are paced by the wall clock.
  ClockMode mode = ClockMode::stepped;
  std::uint64_t seed = 0;
  std::int64_t max_ticks = 10000;
  /// Primitive durations; unset picks one tick per primitive in stepped
  /// mode and the default motion timing in real time.
  std::optional<MotionTiming> timing;
  EngineOptions engine;
  /// Ticks a pressed button may stay unbindable before a warning.
  int button_warning_ticks = 10;

  /// Throws ValidationError on a non-positive period or tick budget.
  void validate() const;
  MotionTiming effective_timing() const;
};

struct Envelope {
  Command command;
  std::optional<std::string> request_id;
};

/// One workspace, one program, one robot. All state changes happen inside
/// tick(); submit() is the only member safe to call from other threads.
class Session {
 public:
  Session(std::shared_ptr<const Scenario> scenario, Program program = {},
          SessionConfig config = {}, HumanScript script = {});

  void submit(Command command, std::optional<std::string> request_id = std::nullopt);

  /// Runs one tick: script and queued commands, executor, snapshot and
  /// evaluation. Returns the events appended during the tick.
  std::span<const TraceEvent> tick();

  /// Nothing left to do: script done, queue empty, robot idle, no open or
  /// pending conflict and nothing flagged at the last evaluation.
  bool quiescent() const;

  /// Appends a Timeout marker at the current tick.
  void mark_timeout();

  std::int64_t next_tick() const { return tick_; }
  const World& world() const { return world_; }
  const Program& program() const { return program_; }
  const Executor& executor() const { return executor_; }
  const ConflictArbiter& arbiter() const { return arbiter_; }
  const ExecutionTrace& trace() const { return trace_; }
  const SessionConfig& config() const { return config_; }
  const Scenario& scenario() const { return *scenario_; }
  /// Perceived state published at the last tick.
  const PerceivedState& snapshot() const { return snapshot_; }

 private:
  void apply(const Envelope& envelope, std::vector<Event>& events);
  void evaluate(std::vector<Event>& events);
  void dispatch(Binding binding, std::vector<Event>& events);
  void track_buttons(const std::vector<Binding>& flags, std::vector<Event>& events);

  std::shared_ptr<const Scenario> scenario_;
  SessionConfig config_;
  World world_;
  Program program_;
  Executor executor_;
  ConflictArbiter arbiter_;
  ScriptRunner script_;
  ExecutionTrace trace_;
  PerceivedState snapshot_;
  std::int64_t tick_ = 0;
  bool flagged_last_ = false;
  std::map<std::string, int, std::less<>> unbound_buttons_;

  mutable std::mutex queue_mutex_;
  std::vector<Envelope> queue_;
};

struct RunResult {
  ExecutionTrace trace;
  World world;
  Program program;
  bool timed_out = false;
  std::int64_t ticks = 0;
};

/// Runs until the session is quiescent or the tick budget is spent. In
/// real-time mode ticks are paced against absolute deadlines.
RunResult run_headless(std::shared_ptr<const Scenario> scenario, Program program,
                       HumanScript script, SessionConfig config);

/// Calls `tick` every `period` against absolute deadlines, so a slow tick
/// does not shift the ones after it. Returns when `tick` returns false or
/// `stop` is requested.
void pace(std::chrono::milliseconds period, std::stop_token stop,
          const std::function<bool()>& tick);

/// Program state implied by an event stream: zone, rule, button,
/// preference, pause and load events replayed in order.
Program rebuild_program(std::span<const TraceEvent> events);

Json snapshot_json(const PerceivedState& perceived);

}  // namespace slp
