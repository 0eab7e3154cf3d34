#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "slp/session.hpp"

namespace slp {

inline constexpr int kProtocolVersion = 1;

/// What the authoring UI offers in its dropdowns, taken from the latest
/// snapshot: only categories with at least one perceived object appear.
Json dropdown_catalog(const Scenario& scenario, const PerceivedState& perceived);

/// Candidates of a conflict rendered for the prompt dialog.
Json conflict_prompt_json(const ConflictRecord& record, const Program& program);

/// Full state frame: perceived objects, program, robot, open conflict and
/// the dropdown catalog.
Json snapshot_frame(const Session& session);

/// What a subscriber receives after each tick.
struct TickUpdate {
  std::vector<TraceEvent> events;
  Json snapshot;
  /// Set when a conflict was raised during the tick.
  std::optional<Json> prompt;
};

/// A session driven by the wall clock on its own thread. Clients submit
/// commands and subscribe to updates; both are thread-safe.
class LiveSession {
 public:
  using Subscriber = std::function<void(const TickUpdate&)>;

  LiveSession(std::shared_ptr<const Scenario> scenario, Program program, SessionConfig config);
  ~LiveSession();

  LiveSession(const LiveSession&) = delete;
  LiveSession& operator=(const LiveSession&) = delete;

  void start();
  void stop();
  bool running() const;

  void submit(Command command, std::optional<std::string> request_id);
  std::uint64_t subscribe(Subscriber subscriber);
  void unsubscribe(std::uint64_t token);

  /// Runs `fn` with the session locked against the tick thread.
  template <typename Fn>
  auto inspect(Fn&& fn) const {
    std::lock_guard lock(session_mutex_);
    return fn(static_cast<const Session&>(session_));
  }

  /// Advances one tick on the caller's thread; for tests that need
  /// determinism without the clock.
  void tick_now();

 private:
  void run_tick();

  mutable std::mutex session_mutex_;
  Session session_;
  std::mutex subscriber_mutex_;
  std::map<std::uint64_t, Subscriber> subscribers_;
  std::uint64_t next_token_ = 1;
  std::jthread thread_;
};

/// Scenarios offered by the service and the sessions opened on them. Every
/// Hello opens a fresh session; a client may reattach to an existing one
/// by id.
class SessionHub {
 public:
  explicit SessionHub(SessionConfig config, bool autostart = true);
  ~SessionHub();

  /// `program` seeds every session opened on the scenario; empty by default.
  void add_scenario(std::shared_ptr<const Scenario> scenario, Program program = {});
  std::vector<std::string> scenario_names() const;

  struct Opened {
    std::string id;
    std::shared_ptr<LiveSession> session;
  };
  /// Throws ReferenceError for unknown scenarios.
  Opened open(const std::string& scenario);
  /// Throws ReferenceError for unknown session ids.
  std::shared_ptr<LiveSession> find(const std::string& id) const;
  void stop_all();

 private:
  struct Entry {
    std::shared_ptr<const Scenario> scenario;
    Program program;
  };
  SessionConfig config_;
  bool autostart_;
  mutable std::mutex mutex_;
  std::map<std::string, Entry> scenarios_;
  std::map<std::string, std::shared_ptr<LiveSession>> sessions_;
  std::int64_t counter_ = 0;
};

/// One client connection, independent of the transport. Incoming text
/// frames go to handle(); frames for the client go to `send`, possibly
/// from the session thread.
class ProtocolHandler {
 public:
  using Send = std::function<void(std::string)>;

  ProtocolHandler(SessionHub& hub, Send send);
  ~ProtocolHandler();

  ProtocolHandler(const ProtocolHandler&) = delete;
  ProtocolHandler& operator=(const ProtocolHandler&) = delete;

  void handle(std::string_view frame);
  /// Drops the subscription; no frames are sent afterwards.
  void close();

  const std::shared_ptr<LiveSession>& session() const { return live_; }
  const std::string& session_id() const { return session_id_; }

 private:
  void hello(const Json& msg);
  void command(const Json& msg);
  void error(const std::optional<std::string>& request_id, const std::string& message);

  SessionHub& hub_;
  std::shared_ptr<Send> send_;
  std::shared_ptr<LiveSession> live_;
  std::string session_id_;
  std::optional<std::uint64_t> token_;
};

/// Outcome of driving a recorded client transcript against a hub.
struct TranscriptRun {
  std::string session_id;
  std::shared_ptr<LiveSession> session;
  /// Every frame the client received, in order.
  std::vector<Json> received;
  std::int64_t ticks = 0;
};

/// Replays a transcript: one JSON object per line, either {"frame": ...}
/// sent as-is, or {"wait": ...} which ticks until the condition holds.
/// Waits are "prompt" (a ConflictPrompt arrived since the last wait),
/// "quiescent", {"ticks": n} or {"exists": selector}; frames sent before a
/// wait are applied by one tick before it is checked. The hub must not
/// autostart its sessions. Throws StateError when a wait exceeds
/// `max_ticks` or a frame is sent before Hello succeeded.
TranscriptRun replay_transcript(SessionHub& hub, std::string_view text,
                                std::int64_t max_ticks = 2000);

}  // namespace slp
