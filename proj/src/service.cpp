#include "slp/service.hpp"

#include <algorithm>
#include <utility>

#include "slp/error.hpp"

namespace slp {

using namespace json_util;

Json dropdown_catalog(const Scenario& scenario, const PerceivedState& perceived) {
  Json categories = Json::array();
  Json containers = Json::array();
  for (const auto& c : scenario.categories) {
    const bool seen = std::any_of(perceived.objects.begin(), perceived.objects.end(),
                                  [&](const WorkspaceObject& o) { return o.category == c.name; });
    if (!seen) continue;
    categories.push_back({{"name", c.name}, {"states", c.states}, {"container", c.is_container}});
    if (c.is_container) containers.push_back(c.name);
  }
  Json zones = Json::array();
  Json free_colors = Json::array();
  for (auto color : kZonePalette) {
    if (perceived.zone_by_color(color) == nullptr) free_colors.push_back(color);
  }
  for (const auto& z : perceived.zones) zones.push_back(z.color);
  return {{"categories", categories},
          {"containers", containers},
          {"zones", zones},
          {"free_colors", free_colors},
          {"predicates", {"is_in", "is_not_in", "has_state"}},
          {"placements", {"grid", "middle", "inside"}}};
}

Json conflict_prompt_json(const ConflictRecord& record, const Program& program) {
  Json candidates = Json::array();
  for (const auto& id : record.candidates) {
    std::string text = id;
    if (const Rule* r = program.find_rule(id)) {
      text = render_rule(*r);
    } else if (const auto* b = program.find_button(id)) {
      text = render_button(*b);
    }
    candidates.push_back({{"id", id}, {"text", text}});
  }
  return {{"type", "ConflictPrompt"},
          {"conflict", record.id},
          {"tick", record.tick},
          {"candidates", candidates}};
}

Json snapshot_frame(const Session& session) {
  const Executor& ex = session.executor();
  Json robot = {{"position", point_json(ex.robot_position())},
                {"busy", !ex.idle()},
                {"waiting", ex.waiting_at_boundary()}};
  if (auto src = ex.running_source()) robot["running"] = *src;
  if (auto i = ex.action_index()) robot["action_index"] = *i;
  if (auto i = ex.primitive_index()) robot["primitive_index"] = *i;
  if (auto h = ex.held_object()) robot["holding"] = *h;

  Json frame = snapshot_json(session.snapshot());
  frame["type"] = "Snapshot";
  frame["program"] = session.program().to_json();
  frame["robot"] = std::move(robot);
  frame["paused"] = session.program().paused();
  frame["conflict"] = session.arbiter().open() ? Json(session.arbiter().open()->id) : Json(nullptr);
  frame["catalog"] = dropdown_catalog(session.scenario(), session.snapshot());
  return frame;
}

// LiveSession ---------------------------------------------------------------------

LiveSession::LiveSession(std::shared_ptr<const Scenario> scenario, Program program,
                         SessionConfig config)
    : session_(std::move(scenario), std::move(program), config) {}

LiveSession::~LiveSession() { stop(); }

void LiveSession::start() {
  if (thread_.joinable()) return;
  const auto period = session_.config().tick_period;
  thread_ = std::jthread([this, period](std::stop_token stop) {
    pace(period, stop, [this] {
      run_tick();
      return true;
    });
  });
}

void LiveSession::stop() {
  if (!thread_.joinable()) return;
  thread_.request_stop();
  thread_.join();
  thread_ = {};
}

bool LiveSession::running() const { return thread_.joinable(); }

void LiveSession::submit(Command command, std::optional<std::string> request_id) {
  session_.submit(std::move(command), std::move(request_id));
}

std::uint64_t LiveSession::subscribe(Subscriber subscriber) {
  std::lock_guard lock(subscriber_mutex_);
  const auto token = next_token_++;
  subscribers_.emplace(token, std::move(subscriber));
  return token;
}

void LiveSession::unsubscribe(std::uint64_t token) {
  std::lock_guard lock(subscriber_mutex_);
  subscribers_.erase(token);
}

void LiveSession::tick_now() { run_tick(); }

void LiveSession::run_tick() {
  // Subscribers are notified under the session lock so that a client
  // attaching between ticks sees every update exactly once.
  std::lock_guard lock(session_mutex_);
  TickUpdate update;
  auto events = session_.tick();
  update.events.assign(events.begin(), events.end());
  update.snapshot = snapshot_frame(session_);
  const bool raised = std::any_of(events.begin(), events.end(), [](const TraceEvent& e) {
    return e.kind == EventKind::ConflictRaised;
  });
  if (raised && session_.arbiter().open()) {
    update.prompt = conflict_prompt_json(*session_.arbiter().open(), session_.program());
  }
  std::lock_guard sub_lock(subscriber_mutex_);
  for (auto& [token, fn] : subscribers_) fn(update);
}

// SessionHub ----------------------------------------------------------------------

SessionHub::SessionHub(SessionConfig config, bool autostart)
    : config_(config), autostart_(autostart) {
  config_.validate();
}

SessionHub::~SessionHub() { stop_all(); }

void SessionHub::add_scenario(std::shared_ptr<const Scenario> scenario, Program program) {
  if (auto issues = program.validate(*scenario); !issues.empty()) {
    throw ValidationError(std::move(issues));
  }
  std::lock_guard lock(mutex_);
  const std::string name = scenario->name;
  scenarios_[name] = Entry{std::move(scenario), std::move(program)};
}

std::vector<std::string> SessionHub::scenario_names() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> names;
  for (const auto& [name, entry] : scenarios_) names.push_back(name);
  return names;
}

SessionHub::Opened SessionHub::open(const std::string& scenario) {
  std::lock_guard lock(mutex_);
  auto it = scenarios_.find(scenario);
  if (it == scenarios_.end()) throw ReferenceError("unknown scenario '" + scenario + "'");
  auto live = std::make_shared<LiveSession>(it->second.scenario, it->second.program, config_);
  if (autostart_) live->start();
  std::string id = "S" + std::to_string(++counter_);
  sessions_.emplace(id, live);
  return {std::move(id), std::move(live)};
}

std::shared_ptr<LiveSession> SessionHub::find(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw ReferenceError("unknown session '" + id + "'");
  return it->second;
}

void SessionHub::stop_all() {
  std::lock_guard lock(mutex_);
  for (auto& [id, live] : sessions_) live->stop();
}

// ProtocolHandler -----------------------------------------------------------------

ProtocolHandler::ProtocolHandler(SessionHub& hub, Send send)
    : hub_(hub), send_(std::make_shared<Send>(std::move(send))) {}

ProtocolHandler::~ProtocolHandler() { close(); }

void ProtocolHandler::close() {
  if (live_ && token_) live_->unsubscribe(*token_);
  token_.reset();
}

void ProtocolHandler::error(const std::optional<std::string>& request_id,
                            const std::string& message) {
  Json frame = {{"type", "Error"}, {"message", message}};
  frame["request_id"] = request_id ? Json(*request_id) : Json(nullptr);
  (*send_)(frame.dump());
}

void ProtocolHandler::handle(std::string_view text) {
  Json msg;
  std::optional<std::string> rid;
  try {
    msg = parse_document(text);
    if (!msg.is_object()) throw ParseError("/", "expected an object");
    if (const Json* r = optional_field(msg, "request_id"); r && r->is_string()) {
      rid = r->get<std::string>();
    }
    const std::string type = get_string(msg, "type", "");
    if (type == "Hello") {
      hello(msg);
    } else if (type == "Command") {
      command(msg);
    } else {
      throw ParseError("/type", "unknown message type '" + type + "'");
    }
  } catch (const Error& e) {
    error(rid, e.what());
  }
}

void ProtocolHandler::hello(const Json& msg) {
  if (live_) throw StateError("already attached to a session");
  const auto version = get_int(msg, "version", "");
  if (version != kProtocolVersion) {
    throw StateError("unsupported protocol version " + std::to_string(version));
  }
  const bool replay = get_bool(msg, "replay", "", false);
  if (auto id = get_optional_string(msg, "session", "")) {
    live_ = hub_.find(*id);
    session_id_ = *id;
  } else {
    auto opened = hub_.open(get_string(msg, "scenario", ""));
    live_ = std::move(opened.session);
    session_id_ = std::move(opened.id);
  }

  Json ack = {{"type", "Ack"}, {"version", kProtocolVersion}, {"session", session_id_}};
  ack["request_id"] = msg.contains("request_id") ? msg.at("request_id") : Json(nullptr);
  (*send_)(ack.dump());

  // Subscribing under the session lock means no tick falls between the
  // history sent here and the first pushed update.
  std::weak_ptr<Send> weak = send_;
  live_->inspect([&](const Session& s) {
    if (replay) {
      for (const auto& e : s.trace().events()) {
        if (e.kind == EventKind::SnapshotPublished) continue;
        (*send_)(Json{{"type", "Event"}, {"event", trace_event_json(e)}}.dump());
      }
    }
    (*send_)(snapshot_frame(s).dump());
    if (s.arbiter().open()) (*send_)(conflict_prompt_json(*s.arbiter().open(), s.program()).dump());
    token_ = live_->subscribe([weak](const TickUpdate& u) {
      auto send = weak.lock();
      if (!send) return;
      for (const auto& e : u.events) {
        if (e.kind == EventKind::SnapshotPublished) continue;
        (*send)(Json{{"type", "Event"}, {"event", trace_event_json(e)}}.dump());
      }
      (*send)(u.snapshot.dump());
      if (u.prompt) (*send)(u.prompt->dump());
    });
  });
}

void ProtocolHandler::command(const Json& msg) {
  if (!live_) throw StateError("say Hello first");
  const std::string kind = get_string(msg, "kind", "");
  const Json* payload = optional_field(msg, "payload");
  Command cmd = parse_command(kind, payload ? *payload : Json::object());
  std::optional<std::string> rid;
  if (const Json* r = optional_field(msg, "request_id"); r && r->is_string()) {
    rid = r->get<std::string>();
  }
  live_->submit(std::move(cmd), rid);
  Json ack = {{"type", "Ack"}, {"kind", kind}};
  ack["request_id"] = rid ? Json(*rid) : Json(nullptr);
  (*send_)(ack.dump());
}

// Transcripts ---------------------------------------------------------------------

TranscriptRun replay_transcript(SessionHub& hub, std::string_view text, std::int64_t max_ticks) {
  TranscriptRun run;
  std::mutex received_mutex;
  bool prompted = false;
  ProtocolHandler client(hub, [&](std::string frame) {
    std::lock_guard lock(received_mutex);
    Json j = Json::parse(frame);
    if (j.value("type", "") == "ConflictPrompt") prompted = true;
    run.received.push_back(std::move(j));
  });

  auto live = [&]() -> LiveSession& {
    if (!client.session()) throw StateError("transcript waits before a session is open");
    return *client.session();
  };
  // Frames sent since the last tick are applied before a wait is checked.
  bool unapplied = false;
  auto tick_until = [&](const std::function<bool()>& done) {
    if (std::exchange(unapplied, false)) {
      live().tick_now();
      ++run.ticks;
    }
    for (std::int64_t n = 0; !done(); ++n) {
      if (n >= max_ticks) throw StateError("transcript wait did not finish");
      live().tick_now();
      ++run.ticks;
    }
  };

  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const std::string where = "line " + std::to_string(line_no);
    Json entry;
    try {
      entry = Json::parse(line);
    } catch (const Json::exception& e) {
      throw ParseError(where, e.what());
    }
    if (const Json* frame = optional_field(entry, "frame")) {
      client.handle(frame->dump());
      unapplied = true;
      continue;
    }
    const Json* wait = optional_field(entry, "wait");
    if (wait == nullptr) throw ParseError(where, "expected \"frame\" or \"wait\"");
    if (*wait == "prompt") {
      tick_until([&] {
        std::lock_guard lock(received_mutex);
        return std::exchange(prompted, false);
      });
    } else if (*wait == "quiescent") {
      tick_until([&] { return live().inspect([](const Session& s) { return s.quiescent(); }); });
    } else if (wait->is_object() && wait->contains("ticks")) {
      const auto n = get_int(*wait, "ticks", where);
      std::int64_t done = 0;
      tick_until([&] { return done++ >= n; });
    } else if (wait->is_object() && wait->contains("exists")) {
      const auto selector = parse_selector(wait->at("exists"), where);
      tick_until([&] {
        return live().inspect([&](const Session& s) {
          return select_object(selector, s.world(), s.program().zones()).has_value();
        });
      });
    } else {
      throw ParseError(where, "unknown wait");
    }
  }
  client.close();
  run.session_id = client.session_id();
  run.session = client.session();
  return run;
}

}  // namespace slp
