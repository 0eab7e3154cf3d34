#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "slp/geometry.hpp"
#include "slp/json_util.hpp"
#include "slp/scenario.hpp"

namespace slp {

using ObjectId = std::int64_t;

struct WorkspaceObject {
  ObjectId id = 0;
  std::string category;
  Point position;
  /// Table under the object; empty when it sits outside every table.
  std::string table;
  std::optional<std::string> state;
  std::optional<ObjectId> contained_in;
  /// Objects riding with this one (contents, stacked parts).
  std::vector<ObjectId> attached;
  /// Closed in the robot gripper.
  bool held = false;
  std::optional<std::string> label;

  bool top_level() const { return !contained_in.has_value(); }

  friend bool operator==(const WorkspaceObject&, const WorkspaceObject&) = default;
};

/// Zone membership: centroid inside the closed rectangle, and not in the
/// gripper.
inline bool in_zone(const WorkspaceObject& obj, const Rect& rect) {
  return !obj.held && rect.contains(obj.position);
}

/// User-drawn colored rectangle. Rules refer to zones by color.
struct Zone {
  std::string id;
  std::string color;
  Rect rect;
  std::int64_t created_at = 0;

  friend bool operator==(const Zone&, const Zone&) = default;
};

/// Immutable view handed to the rule engine: detectable objects only,
/// ordered by id.
struct PerceivedState {
  std::int64_t tick = 0;
  std::vector<WorkspaceObject> objects;
  std::vector<Zone> zones;

  const Zone* zone_by_color(std::string_view color) const;
  const WorkspaceObject* find(ObjectId id) const;

  friend bool operator==(const PerceivedState&, const PerceivedState&) = default;
};

class World {
 public:
  explicit World(std::shared_ptr<const Scenario> scenario);

  const Scenario& scenario() const { return *scenario_; }
  const std::shared_ptr<const Scenario>& scenario_ptr() const { return scenario_; }

  /// Ordered by id.
  const std::vector<WorkspaceObject>& objects() const { return objects_; }
  const WorkspaceObject* find(ObjectId id) const;
  /// Throws ReferenceError for unknown ids.
  const WorkspaceObject& get(ObjectId id) const;

  ObjectId spawn(std::string_view category, Point position,
                 std::optional<std::string> state = std::nullopt,
                 std::optional<std::string> label = std::nullopt);

  /// Moves an object and everything riding on it. A contained object is
  /// first taken out of its container.
  void move_to(ObjectId id, Point position);
  /// Marks the object and its riders as being in the gripper.
  void set_held(ObjectId id, bool held);

  /// Puts `part` into `container`. When the scenario pairs the two
  /// categories through combination rules, one of them must match the
  /// container's current state and is applied; otherwise the container
  /// must be a container category. Returns a description of the effect.
  Json insert_into(ObjectId part, ObjectId container);

  /// Applies the combination rule matching (part, target, target state).
  /// Throws StateError when none matches; the world is left unchanged.
  Json combine(ObjectId part, ObjectId target);

  /// Removes the object and everything riding on it.
  void remove(ObjectId id);

  /// Restores the scenario's initial placement. Ids keep counting up.
  void reset();

  /// Walks containment links; false on a cycle or a dangling link.
  bool containment_consistent() const;

 private:
  WorkspaceObject& mut(ObjectId id);
  void detach(WorkspaceObject& obj);
  void shift_riders(const WorkspaceObject& obj);
  bool is_inside(ObjectId inner, ObjectId outer) const;
  std::string table_name(Point p) const;
  void apply_combination(WorkspaceObject& part, WorkspaceObject& target,
                         const CombinationRule& rule, Json& out);

  std::shared_ptr<const Scenario> scenario_;
  std::vector<WorkspaceObject> objects_;
  ObjectId next_id_ = 1;
};

/// Human operations on the shared workspace.
struct Relocate {
  ObjectId object = 0;
  /// A table position, or a container to put the object into.
  std::variant<Point, ObjectId> destination;
};
struct Combine {
  ObjectId part = 0;
  ObjectId target = 0;
};
struct Remove {
  ObjectId object = 0;
};
struct Spawn {
  std::string category;
  Point position;
};
using HumanOp = std::variant<Relocate, Combine, Remove, Spawn>;

/// Applies a human operation. Throws ReferenceError / StateError and leaves
/// the world unchanged on rejection. Returns the HumanActionApplied payload.
Json apply_human_action(World& world, const HumanOp& op);

/// Snapshot of what the robot perceives. Pure in its arguments: position
/// noise, when configured, is derived from (seed, tick, object id).
PerceivedState perceived_view(const World& world, std::span<const Zone> zones,
                              const PerceptionConfig& config, std::int64_t tick = 0,
                              std::uint64_t seed = 0);

/// First row-major grid cell with no top-level object centroid within
/// `clearance`.
std::optional<Point> next_free_cell(std::span<const WorkspaceObject> objects, const Rect& zone,
                                    int columns, int rows, double clearance);
std::optional<Point> next_free_cell(const World& world, const Rect& zone, int columns, int rows,
                                    double clearance);

Json object_json(const WorkspaceObject& obj);

}  // namespace slp
