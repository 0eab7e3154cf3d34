#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "slp/binding.hpp"
#include "slp/program.hpp"
#include "slp/trace.hpp"

namespace slp {

struct ConflictResolution {
  std::string chosen;
  bool remember = false;
};

struct ConflictRecord {
  std::string id;
  std::int64_t tick = 0;
  /// Rule/button ids in flag order; at least two.
  std::vector<std::string> candidates;
  std::optional<ConflictResolution> resolution;
};

struct NoFlags {};
struct SingleFlag {
  Binding binding;
};
/// Several flags, answered by a remembered preference.
struct AutoResolved {
  Binding binding;
  std::vector<std::string> candidates;
};
/// Several flags and no preference for this exact set: ask the user.
struct NeedsPrompt {
  std::vector<std::string> candidates;
};
using ConflictOutcome = std::variant<NoFlags, SingleFlag, AutoResolved, NeedsPrompt>;

ConflictOutcome detect_conflict(std::vector<Binding> flags, const PreferenceStore& preferences);

/// Owns the open prompt. While a prompt is open nothing is dispatched; a
/// prompt whose candidates stop flagging together is cancelled.
class ConflictArbiter {
 public:
  struct Step {
    std::optional<Binding> dispatch;
    std::vector<Event> events;
  };

  /// Runs one evaluation step over the flags of that step.
  Step evaluate(std::vector<Binding> flags, const PreferenceStore& preferences,
                std::int64_t tick);

  /// Closes the open prompt with the user's choice. `conflict_id` may be
  /// omitted to answer whichever prompt is open. Throws StateError for an
  /// unknown or closed conflict, or a choice outside the candidates.
  Event resolve(const std::optional<std::string>& conflict_id, const std::string& chosen,
                bool remember, PreferenceStore& preferences);

  /// Choice waiting to be re-bound and dispatched.
  std::optional<std::string> take_pending_choice();
  bool has_pending_choice() const { return pending_choice_.has_value(); }

  const std::optional<ConflictRecord>& open() const { return open_; }
  const std::vector<ConflictRecord>& history() const { return history_; }

  /// Cancels the open prompt, if any.
  std::optional<Event> cancel(const std::string& reason);

 private:
  std::optional<ConflictRecord> open_;
  std::optional<std::string> pending_choice_;
  std::vector<ConflictRecord> history_;
  std::int64_t counter_ = 0;
};

}  // namespace slp
