#include "slp/session.hpp"

#include <algorithm>
#include <condition_variable>

#include "slp/error.hpp"

namespace slp {

void SessionConfig::validate() const {
  std::vector<std::string> issues;
  if (tick_period.count() <= 0) issues.push_back("tick period must be positive");
  if (max_ticks <= 0) issues.push_back("max ticks must be positive");
  if (button_warning_ticks <= 0) issues.push_back("button warning ticks must be positive");
  if (engine.grid_clearance < 0.0) issues.push_back("grid clearance must not be negative");
  if (timing && (timing->move.count() <= 0 || timing->gripper.count() <= 0)) {
    issues.push_back("primitive durations must be positive");
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
}

MotionTiming SessionConfig::effective_timing() const {
  if (timing) return *timing;
  return mode == ClockMode::stepped ? MotionTiming::per_tick(tick_period) : MotionTiming{};
}

Json snapshot_json(const PerceivedState& perceived) {
  Json objects = Json::array();
  for (const auto& o : perceived.objects) objects.push_back(object_json(o));
  Json zones = Json::array();
  for (const auto& z : perceived.zones) zones.push_back(zone_json(z));
  return {{"tick", perceived.tick}, {"objects", objects}, {"zones", zones}};
}

namespace {

std::shared_ptr<const Scenario> checked(std::shared_ptr<const Scenario> scenario) {
  if (!scenario) throw std::invalid_argument("session needs a scenario");
  return scenario;
}

const Zone& resolve_zone(const Program& program, std::string_view ref) {
  if (const Zone* z = program.find_zone(ref)) return *z;
  if (const Zone* z = program.zone_by_color(ref)) return *z;
  throw ReferenceError("unknown zone '" + std::string(ref) + "'");
}

const ManualTrigger& resolve_button(const Program& program, std::string_view ref) {
  if (const auto* b = program.find_button(ref)) return *b;
  for (const auto& b : program.buttons()) {
    if (b.label == ref) return b;
  }
  throw ReferenceError("unknown button '" + std::string(ref) + "'");
}

Event with_request(Event event, const std::optional<std::string>& request_id) {
  if (request_id) event.payload["request_id"] = *request_id;
  return event;
}

Event warning(std::string code, std::string message, const std::optional<std::string>& request_id) {
  return with_request({EventKind::Warning, {{"code", std::move(code)}, {"message", std::move(message)}}},
                      request_id);
}

Event rejection(const Envelope& envelope, const std::string& message) {
  return with_request({EventKind::Error,
                       {{"command", command_kind(envelope.command)}, {"message", message}}},
                      envelope.request_id);
}

}  // namespace

Session::Session(std::shared_ptr<const Scenario> scenario, Program program, SessionConfig config,
                 HumanScript script)
    : scenario_(checked(std::move(scenario))),
      config_(config),
      world_(scenario_),
      program_(std::move(program)),
      executor_(scenario_->robot_home, config.effective_timing(), config.engine),
      script_(std::move(script)) {
  config_.validate();
  if (auto issues = program_.validate(*scenario_); !issues.empty()) {
    throw ValidationError(std::move(issues));
  }
  snapshot_ = perceived_view(world_, program_.zones(), scenario_->perception, 0, config_.seed);
  // The starting program opens the trace so the event stream alone
  // reproduces program state.
  trace_.append(0, {EventKind::ProgramLoaded, {{"program", program_.to_json()}, {"initial", true}}});
}

void Session::submit(Command command, std::optional<std::string> request_id) {
  std::lock_guard lock(queue_mutex_);
  queue_.push_back({std::move(command), std::move(request_id)});
}

std::span<const TraceEvent> Session::tick() {
  const std::int64_t t = tick_;
  std::vector<Event> events;

  // Commands: the scripted human first, then whatever clients queued.
  for (auto& cmd : script_.poll(t, world_, program_.zones(), arbiter_.open().has_value())) {
    submit(std::move(cmd));
  }
  std::vector<Envelope> batch;
  {
    std::lock_guard lock(queue_mutex_);
    batch.swap(queue_);
  }
  for (const auto& envelope : batch) {
    try {
      apply(envelope, events);
    } catch (const ValidationError& e) {
      events.push_back(rejection(envelope, e.what()));
      events.back().payload["issues"] = e.issues();
    } catch (const Error& e) {
      events.push_back(rejection(envelope, e.what()));
    }
  }

  // Robot.
  if (!executor_.idle()) {
    auto stepped = executor_.step(world_, config_.tick_period, program_.paused());
    events.insert(events.end(), stepped.begin(), stepped.end());
  }

  // Perception, then evaluation while the robot is idle.
  snapshot_ = perceived_view(world_, program_.zones(), scenario_->perception, t, config_.seed);
  events.push_back({EventKind::SnapshotPublished, snapshot_json(snapshot_)});
  flagged_last_ = false;
  if (executor_.idle() && !program_.paused()) evaluate(events);

  const std::size_t first = trace_.size();
  for (auto& e : events) trace_.append(t, std::move(e));
  ++tick_;
  return std::span(trace_.events()).subspan(first);
}

void Session::evaluate(std::vector<Event>& events) {
  if (auto choice = arbiter_.take_pending_choice()) {
    std::optional<Binding> binding;
    if (const Rule* rule = program_.find_rule(*choice)) {
      binding = bind_rule(*rule, snapshot_, *scenario_, config_.engine);
    } else if (const auto* button = program_.find_button(*choice); button && button->pending) {
      binding = bind_actions(button->id, true, {}, button->actions, snapshot_, *scenario_,
                             config_.engine);
    }
    if (binding) {
      events.push_back({EventKind::RuleFlagged, binding_json(*binding)});
      flagged_last_ = true;
      dispatch(std::move(*binding), events);
      return;
    }
    events.push_back(warning("binding-stale", *choice + " no longer applies", std::nullopt));
  }

  std::vector<std::string> warnings;
  auto flags = flag_executable(program_, snapshot_, true, *scenario_, config_.engine, &warnings);
  std::sort(warnings.begin(), warnings.end());
  warnings.erase(std::unique(warnings.begin(), warnings.end()), warnings.end());
  for (auto& w : warnings) events.push_back(warning("dangling-zone", std::move(w), std::nullopt));
  for (const auto& f : flags) events.push_back({EventKind::RuleFlagged, binding_json(f)});
  flagged_last_ = !flags.empty();
  track_buttons(flags, events);

  auto step = arbiter_.evaluate(std::move(flags), program_.preferences(), tick_);
  events.insert(events.end(), step.events.begin(), step.events.end());
  if (step.dispatch) dispatch(std::move(*step.dispatch), events);
}

void Session::track_buttons(const std::vector<Binding>& flags, std::vector<Event>& events) {
  for (const auto& b : program_.buttons()) {
    if (!b.pending) continue;
    const bool bound = std::any_of(flags.begin(), flags.end(),
                                   [&](const Binding& f) { return f.source == b.id; });
    if (bound) {
      unbound_buttons_.erase(b.id);
      continue;
    }
    if (++unbound_buttons_[b.id] == config_.button_warning_ticks) {
      auto w = warning("button-unbound",
                       "button '" + b.label + "' has been pending for " +
                           std::to_string(config_.button_warning_ticks) +
                           " ticks with nothing to move",
                       std::nullopt);
      w.payload["button"] = b.id;
      events.push_back(std::move(w));
    }
  }
}

void Session::dispatch(Binding binding, std::vector<Event>& events) {
  if (binding.from_button) {
    program_.consume_button(binding.source);
    unbound_buttons_.erase(binding.source);
    events.push_back({EventKind::ButtonConsumed, {{"button", binding.source}}});
  }
  auto started = executor_.begin(std::move(binding), world_);
  events.insert(events.end(), started.begin(), started.end());
}

void Session::apply(const Envelope& envelope, std::vector<Event>& events) {
  const auto& rid = envelope.request_id;
  const auto emit = [&](EventKind kind, Json payload) {
    events.push_back(with_request({kind, std::move(payload)}, rid));
  };

  std::visit(
      [&](const auto& cmd) {
        using T = std::decay_t<decltype(cmd)>;
        if constexpr (std::is_same_v<T, CreateZoneCmd>) {
          emit(EventKind::ZoneCreated,
               {{"zone", zone_json(program_.create_zone(cmd.color, cmd.rect, tick_))}});
        } else if constexpr (std::is_same_v<T, UpdateZoneCmd>) {
          const std::string id = resolve_zone(program_, cmd.zone).id;
          emit(EventKind::ZoneUpdated, {{"zone", zone_json(program_.update_zone(id, cmd.rect))}});
        } else if constexpr (std::is_same_v<T, DeleteZoneCmd>) {
          const Zone zone = resolve_zone(program_, cmd.zone);
          const auto disabled = program_.delete_zone(zone.id);
          emit(EventKind::ZoneDeleted, {{"zone", zone.id}, {"color", zone.color}});
          for (const auto& rule : disabled) {
            emit(EventKind::RuleDisabled,
                 {{"rule", rule}, {"reason", "zone " + zone.color + " was deleted"}});
            auto w = warning("rule-disabled",
                             "rule " + rule + " was disabled: its " + zone.color +
                                 " zone was deleted",
                             rid);
            w.payload["rule"] = rule;
            events.push_back(std::move(w));
          }
        } else if constexpr (std::is_same_v<T, CreateRuleCmd>) {
          const Rule& rule = program_.create_rule(cmd.conditions, cmd.actions, *scenario_, tick_);
          emit(EventKind::RuleCreated, {{"rule", rule_json(rule)}, {"text", render_rule(rule)}});
        } else if constexpr (std::is_same_v<T, DeleteRuleCmd>) {
          const bool running = executor_.running_source() == cmd.rule;
          program_.delete_rule(cmd.rule);
          // A running rule finishes its current action list; it just
          // never flags again.
          emit(EventKind::RuleDeleted, {{"rule", cmd.rule}, {"running", running}});
          if (auto open = arbiter_.open()) {
            if (std::find(open->candidates.begin(), open->candidates.end(), cmd.rule) !=
                open->candidates.end()) {
              if (auto e = arbiter_.cancel("rule " + cmd.rule + " was deleted")) {
                events.push_back(std::move(*e));
              }
            }
          }
        } else if constexpr (std::is_same_v<T, CreateButtonCmd>) {
          const auto& b = program_.create_button(cmd.label, cmd.actions, *scenario_);
          emit(EventKind::ButtonCreated, {{"button", button_json(b)}, {"text", render_button(b)}});
        } else if constexpr (std::is_same_v<T, PressButtonCmd>) {
          const std::string id = resolve_button(program_, cmd.button).id;
          program_.press_button(id);
          unbound_buttons_.erase(id);
          emit(EventKind::ButtonPressed, {{"button", id}});
        } else if constexpr (std::is_same_v<T, PauseCmd>) {
          if (!program_.paused()) {
            program_.set_paused(true);
            emit(EventKind::Paused, Json::object());
          }
        } else if constexpr (std::is_same_v<T, ResumeCmd>) {
          if (program_.paused()) {
            program_.set_paused(false);
            emit(EventKind::Resumed, Json::object());
          }
        } else if constexpr (std::is_same_v<T, ResolveConflictCmd>) {
          events.push_back(with_request(
              arbiter_.resolve(cmd.conflict, cmd.chosen, cmd.remember, program_.preferences()),
              rid));
        } else if constexpr (std::is_same_v<T, HumanOpCmd>) {
          const HumanOp op = resolve_human_op(cmd.op, world_, program_.zones());
          if (auto held = executor_.held_object()) {
            const ObjectId touched = std::visit(
                [](const auto& o) -> ObjectId {
                  using O = std::decay_t<decltype(o)>;
                  if constexpr (std::is_same_v<O, Combine>) return o.part;
                  else if constexpr (std::is_same_v<O, Spawn>) return 0;
                  else return o.object;
                },
                op);
            if (touched == *held) throw StateError("object is in the robot gripper");
          }
          emit(EventKind::HumanActionApplied, apply_human_action(world_, op));
        } else if constexpr (std::is_same_v<T, SaveProgramCmd>) {
          emit(EventKind::ProgramSaved, {{"program", program_.to_json()}});
        } else if constexpr (std::is_same_v<T, LoadProgramCmd>) {
          if (auto issues = cmd.program.validate(*scenario_); !issues.empty()) {
            throw ValidationError(std::move(issues));
          }
          if (auto e = arbiter_.cancel("program replaced")) events.push_back(std::move(*e));
          arbiter_.take_pending_choice();
          program_ = cmd.program;
          unbound_buttons_.clear();
          emit(EventKind::ProgramLoaded, {{"program", program_.to_json()}});
        } else if constexpr (std::is_same_v<T, ResetWorkspaceCmd>) {
          auto aborted = executor_.abort(world_, "workspace reset");
          events.insert(events.end(), aborted.begin(), aborted.end());
          if (auto e = arbiter_.cancel("workspace reset")) events.push_back(std::move(*e));
          arbiter_.take_pending_choice();
          world_.reset();
          Json objects = Json::array();
          for (const auto& o : world_.objects()) objects.push_back(object_json(o));
          emit(EventKind::WorkspaceReset, {{"objects", objects}});
        }
      },
      envelope.command);
}

bool Session::quiescent() const {
  {
    std::lock_guard lock(queue_mutex_);
    if (!queue_.empty()) return false;
  }
  return script_.exhausted() && executor_.idle() && !arbiter_.open() &&
         !arbiter_.has_pending_choice() && !flagged_last_;
}

void Session::mark_timeout() {
  trace_.append(tick_, {EventKind::Timeout, {{"max_ticks", config_.max_ticks}}});
}

void pace(std::chrono::milliseconds period, std::stop_token stop,
          const std::function<bool()>& tick) {
  using Clock = std::chrono::steady_clock;
  std::mutex m;
  std::condition_variable_any cv;
  auto deadline = Clock::now();
  while (!stop.stop_requested()) {
    if (!tick()) return;
    deadline += period;
    const auto now = Clock::now();
    // After a long stall, skip the missed deadlines instead of bursting.
    if (now > deadline + period) deadline = now;
    std::unique_lock lock(m);
    cv.wait_until(lock, stop, deadline, [] { return false; });
  }
}

RunResult run_headless(std::shared_ptr<const Scenario> scenario, Program program,
                       HumanScript script, SessionConfig config) {
  Session session(std::move(scenario), std::move(program), config, std::move(script));
  bool timed_out = false;
  const auto step = [&] {
    if (session.next_tick() >= config.max_ticks) {
      session.mark_timeout();
      timed_out = true;
      return false;
    }
    session.tick();
    return !session.quiescent();
  };
  if (config.mode == ClockMode::realtime) {
    pace(config.tick_period, {}, step);
  } else {
    while (step()) {
    }
  }
  return {session.trace(), session.world(), session.program(), timed_out, session.next_tick()};
}

Program rebuild_program(std::span<const TraceEvent> events) {
  Program program;
  for (const auto& e : events) {
    const Json& p = e.payload;
    switch (e.kind) {
      case EventKind::ZoneCreated:
      case EventKind::ZoneUpdated:
        program.restore_zone(parse_zone(p.at("zone"), "/zone"));
        break;
      case EventKind::ZoneDeleted:
        program.delete_zone(p.at("zone").get<std::string>());
        break;
      case EventKind::RuleCreated:
        program.restore_rule(parse_rule(p.at("rule"), "/rule"));
        break;
      case EventKind::RuleDeleted:
        program.delete_rule(p.at("rule").get<std::string>());
        break;
      case EventKind::RuleDisabled:
        if (program.find_rule(p.at("rule").get<std::string>())) {
          program.set_rule_enabled(p.at("rule").get<std::string>(), false);
        }
        break;
      case EventKind::ButtonCreated:
        program.restore_button(parse_button(p.at("button"), "/button"));
        break;
      case EventKind::ButtonPressed:
        program.press_button(p.at("button").get<std::string>());
        break;
      case EventKind::ButtonConsumed:
        program.consume_button(p.at("button").get<std::string>());
        break;
      case EventKind::ConflictResolved:
        if (p.value("remember", false)) {
          program.preferences().remember(p.at("candidates").get<std::vector<std::string>>(),
                                         p.at("chosen").get<std::string>());
        }
        break;
      case EventKind::Paused:
        program.set_paused(true);
        break;
      case EventKind::Resumed:
        program.set_paused(false);
        break;
      case EventKind::ProgramLoaded:
        program = Program::from_json(p.at("program"));
        break;
      default:
        break;
    }
  }
  return program;
}

}  // namespace slp
