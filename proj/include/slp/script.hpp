#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "slp/commands.hpp"

namespace slp {

struct AtTick {
  std::int64_t tick = 0;
};
struct WhenExists {
  ObjectSelector selector;
};
struct WhenAbsent {
  ObjectSelector selector;
};
struct WhenConflictOpen {};
using ScriptTrigger = std::variant<AtTick, WhenExists, WhenAbsent, WhenConflictOpen>;

struct ScriptStep {
  ScriptTrigger trigger;
  Command command;
  /// Times the step fires before the script moves on.
  int repeat = 1;
  /// Ticks between the trigger holding and the command being submitted.
  int delay = 0;
};

/// The scripted human collaborator. Steps run in order: the current step
/// waits for its trigger, submits its command, and after `repeat` firings
/// the next step becomes current. A step fires at most once per tick; only
/// at_tick steps let the following step fire in the same tick.
struct HumanScript {
  std::vector<ScriptStep> steps;
};

HumanScript parse_script(const Json& doc);
HumanScript load_script_file(const std::string& path);

/// Side-effect-free trigger check.
bool trigger_holds(const ScriptTrigger& trigger, std::int64_t tick, const World& world,
                   const std::vector<Zone>& zones, bool conflict_open);

class ScriptRunner {
 public:
  explicit ScriptRunner(HumanScript script = {});

  /// Commands to submit at the start of `tick`.
  std::vector<Command> poll(std::int64_t tick, const World& world, const std::vector<Zone>& zones,
                            bool conflict_open);
  bool exhausted() const { return cursor_ >= script_.steps.size(); }
  std::size_t cursor() const { return cursor_; }

 private:
  HumanScript script_;
  std::size_t cursor_ = 0;
  int fired_ = 0;
  std::optional<std::int64_t> due_;
};

}  // namespace slp
