#pragma once

#include <memory>
#include <string>
#include <vector>

#include "slp/json_util.hpp"
#include "slp/program.hpp"
#include "slp/scenario.hpp"
#include "slp/script.hpp"
#include "slp/trace.hpp"

namespace slp::test {

inline std::string fixture_file(const std::string& name, const std::string& file) {
  return std::string(SLP_FIXTURE_DIR) + "/" + name + "/" + file;
}

inline std::shared_ptr<const Scenario> fixture_scenario(const std::string& name) {
  return std::make_shared<const Scenario>(load_scenario_file(fixture_file(name, "scenario.json")));
}

inline Program fixture_program(const std::string& name) {
  return Program::from_json(
      json_util::parse_document(json_util::read_file(fixture_file(name, "program.json"))));
}

inline HumanScript fixture_script(const std::string& name) {
  return load_script_file(fixture_file(name, "script.json"));
}

inline std::shared_ptr<const Scenario> scenario_from(const std::string& json) {
  return std::make_shared<const Scenario>(load_scenario(json));
}

inline Condition is_in(std::string category, std::string zone) {
  return {std::move(category), IsIn{std::move(zone)}};
}
inline Condition is_not_in(std::string category, std::string zone) {
  return {std::move(category), IsNotIn{std::move(zone)}};
}
inline Condition has_state(std::string category, std::string state) {
  return {std::move(category), HasState{std::move(state)}};
}
inline MoveAction move(std::string category, std::string from, std::string to,
                       Placement placement = Middle{}) {
  return {std::move(category), std::move(from), std::move(to), std::move(placement)};
}

/// Evaluation events that fall inside an action, as "seq N" strings.
inline std::vector<std::string> gating_violations(const std::vector<TraceEvent>& events) {
  std::vector<std::string> out;
  bool in_action = false;
  for (const auto& e : events) {
    switch (e.kind) {
      case EventKind::ActionStarted: in_action = true; break;
      case EventKind::ActionCompleted:
      case EventKind::ActionAborted: in_action = false; break;
      case EventKind::RuleFlagged:
      case EventKind::ConflictRaised:
        if (in_action) out.push_back("seq " + std::to_string(e.seq));
        break;
      default: break;
    }
  }
  return out;
}

}  // namespace slp::test
