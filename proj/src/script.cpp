#include "slp/script.hpp"

#include "slp/error.hpp"

namespace slp {

using namespace json_util;

HumanScript parse_script(const Json& doc) {
  const Json* steps = doc.is_array() ? &doc : optional_field(doc, "steps");
  HumanScript script;
  if (steps == nullptr) return script;
  if (!steps->is_array()) throw ParseError("/steps", "expected an array");
  for (std::size_t i = 0; i < steps->size(); ++i) {
    const Json& s = (*steps)[i];
    const std::string path = child("/steps", i);
    ScriptStep step;
    if (optional_field(s, "at_tick") != nullptr) {
      step.trigger = AtTick{get_int(s, "at_tick", path)};
    } else if (const Json* when = optional_field(s, "when")) {
      const std::string wpath = child(path, "when");
      if (when->is_string() && when->get<std::string>() == "conflict_open") {
        step.trigger = WhenConflictOpen{};
      } else if (const Json* ex = optional_field(*when, "exists")) {
        step.trigger = WhenExists{parse_selector(*ex, child(wpath, "exists"))};
      } else if (const Json* ab = optional_field(*when, "absent")) {
        step.trigger = WhenAbsent{parse_selector(*ab, child(wpath, "absent"))};
      } else {
        throw ParseError(wpath, "expected \"conflict_open\", {\"exists\": ...} or {\"absent\": ...}");
      }
    } else {
      step.trigger = AtTick{0};
    }
    const Json& action = field(s, "do", path);
    const std::string kind = get_string(action, "kind", child(path, "do"));
    const Json* payload = optional_field(action, "payload");
    try {
      step.command = parse_command(kind, payload ? *payload : Json::object());
    } catch (const ParseError& e) {
      throw ParseError(child(path, "do") + e.where(), e.what());
    }
    if (optional_field(s, "repeat") != nullptr) {
      step.repeat = static_cast<int>(get_int(s, "repeat", path));
      if (step.repeat < 1) throw ParseError(child(path, "repeat"), "must be at least 1");
    }
    if (optional_field(s, "delay") != nullptr) {
      step.delay = static_cast<int>(get_int(s, "delay", path));
      if (step.delay < 0) throw ParseError(child(path, "delay"), "must not be negative");
    }
    script.steps.push_back(std::move(step));
  }
  return script;
}

HumanScript load_script_file(const std::string& path) {
  return parse_script(parse_document(read_file(path)));
}

bool trigger_holds(const ScriptTrigger& trigger, std::int64_t tick, const World& world,
                   const std::vector<Zone>& zones, bool conflict_open) {
  if (const auto* at = std::get_if<AtTick>(&trigger)) return tick >= at->tick;
  if (const auto* ex = std::get_if<WhenExists>(&trigger)) {
    return select_object(ex->selector, world, zones).has_value();
  }
  if (const auto* ab = std::get_if<WhenAbsent>(&trigger)) {
    return !select_object(ab->selector, world, zones).has_value();
  }
  return conflict_open;
}

ScriptRunner::ScriptRunner(HumanScript script) : script_(std::move(script)) {}

std::vector<Command> ScriptRunner::poll(std::int64_t tick, const World& world,
                                        const std::vector<Zone>& zones, bool conflict_open) {
  std::vector<Command> out;
  while (!exhausted()) {
    const ScriptStep& step = script_.steps[cursor_];
    if (!due_) {
      if (!trigger_holds(step.trigger, tick, world, zones, conflict_open)) break;
      due_ = tick + step.delay;
    }
    if (tick < *due_) break;
    out.push_back(step.command);
    due_.reset();
    const bool chains = std::holds_alternative<AtTick>(step.trigger);
    if (++fired_ < step.repeat) break;
    fired_ = 0;
    ++cursor_;
    if (!chains) break;
  }
  return out;
}

}  // namespace slp
