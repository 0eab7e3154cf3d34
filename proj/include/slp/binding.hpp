#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "slp/program.hpp"
#include "slp/world.hpp"

namespace slp {

struct EngineOptions {
  /// A grid cell is occupied when a top-level object centroid lies within
  /// this distance of the cell center.
  double grid_clearance = 0.03;
};

/// Container to place into, or a point on the table.
using PlacementTarget = std::variant<Point, ObjectId>;

/// One move action resolved against a perceived state. Zone rectangles
/// and the rule's filters are captured so that the executor can re-check
/// the binding later without consulting the program.
struct ActionBinding {
  MoveAction action;
  ObjectId object = 0;
  Point pickup;
  Rect source;
  Rect destination;
  std::vector<Rect> zone_filters;
  std::vector<std::string> state_filters;
  PlacementTarget target;

  friend bool operator==(const ActionBinding&, const ActionBinding&) = default;
};

struct Binding {
  /// Rule or button id.
  std::string source;
  bool from_button = false;
  std::vector<ActionBinding> actions;

  friend bool operator==(const Binding&, const Binding&) = default;
};

/// IsIn: some object of the category is in the zone. IsNotIn: none is.
/// HasState: some object of the category has the state. A zone color with
/// no live zone makes the condition false and appends a warning.
bool evaluate_condition(const Condition& condition, const PerceivedState& perceived,
                        std::vector<std::string>* warnings = nullptr);

/// Objects an action may pick: top-level objects of the action's category
/// in its source zone, narrowed by every IsIn/HasState condition on the
/// same category. Ordered by id.
std::vector<ObjectId> candidate_set(std::span<const Condition> conditions,
                                    const MoveAction& action, const PerceivedState& perceived);

/// Whether `container` can receive a part of `part_category` right now:
/// when the scenario pairs the categories through combination rules the
/// container's state must match one.
bool container_accepts(std::string_view part_category, const WorkspaceObject& container,
                       const Scenario& scenario);

/// Binds every action (lowest-id candidate, first free cell, lowest-id
/// container). Conditions are used only as filters here.
std::optional<Binding> bind_actions(std::string source, bool from_button,
                                    std::span<const Condition> conditions,
                                    std::span<const MoveAction> actions,
                                    const PerceivedState& perceived, const Scenario& scenario,
                                    const EngineOptions& options);

/// Enabled rule with all conditions true and every action bindable.
std::optional<Binding> bind_rule(const Rule& rule, const PerceivedState& perceived,
                                 const Scenario& scenario, const EngineOptions& options,
                                 std::vector<std::string>* warnings = nullptr);

/// Rules then pending buttons, in program order, that can execute now.
/// Empty while the executor is busy or the program is paused.
std::vector<Binding> flag_executable(const Program& program, const PerceivedState& perceived,
                                     bool executor_idle, const Scenario& scenario,
                                     const EngineOptions& options,
                                     std::vector<std::string>* warnings = nullptr);

Json binding_json(const Binding& binding);

}  // namespace slp
