#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "slp/json_util.hpp"

namespace slp {

enum class EventKind {
  SnapshotPublished,
  ZoneCreated,
  ZoneUpdated,
  ZoneDeleted,
  RuleCreated,
  RuleDeleted,
  RuleDisabled,
  ButtonCreated,
  ButtonPressed,
  ButtonConsumed,
  RuleFlagged,
  ConflictRaised,
  ConflictResolved,
  ConflictCancelled,
  ActionStarted,
  ActionCompleted,
  ActionAborted,
  PrimitiveStarted,
  PrimitiveCompleted,
  HumanActionApplied,
  Paused,
  Resumed,
  ProgramLoaded,
  ProgramSaved,
  WorkspaceReset,
  Warning,
  Error,
  Timeout,
};

std::string_view to_string(EventKind kind);
std::optional<EventKind> event_kind_from_string(std::string_view name);

/// An event before the session stamps it with tick and sequence number.
struct Event {
  EventKind kind;
  Json payload = Json::object();
};

struct TraceEvent {
  std::int64_t tick = 0;
  std::int64_t seq = 0;
  EventKind kind = EventKind::Warning;
  Json payload = Json::object();

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

/// One line of the trace file: keys in sorted order, no whitespace.
std::string canonical_line(const TraceEvent& event);
TraceEvent parse_trace_line(std::string_view line);
Json trace_event_json(const TraceEvent& event);

class ExecutionTrace {
 public:
  const TraceEvent& append(std::int64_t tick, Event event);
  const std::vector<TraceEvent>& events() const { return events_; }
  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }

  std::vector<const TraceEvent*> of_kind(EventKind kind) const;
  std::size_t count(EventKind kind) const;

  /// Newline-delimited canonical lines.
  std::string serialize() const;
  static ExecutionTrace parse(std::string_view text);

  friend bool operator==(const ExecutionTrace&, const ExecutionTrace&) = default;

 private:
  std::vector<TraceEvent> events_;
};

/// SHA-256 (hex) of the canonical serialization. The empty trace hashes
/// the empty string:
/// e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855.
std::string trace_digest(const ExecutionTrace& trace);
std::string sha256_hex(std::string_view data);

}  // namespace slp
