#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "slp/binding.hpp"
#include "slp/error.hpp"
#include "slp/trace.hpp"
#include "slp/world.hpp"

namespace slp {

enum class PrimitiveKind { MoveTo, ToggleGripper };
enum class GripperCommand { Open, Close };

struct Primitive {
  PrimitiveKind kind = PrimitiveKind::MoveTo;
  /// MoveTo target; for gripper toggles, where the gripper is.
  Point target;
  std::string phase;
  GripperCommand gripper = GripperCommand::Open;
  std::chrono::milliseconds duration{0};
};

struct MotionTiming {
  std::chrono::milliseconds move{400};
  std::chrono::milliseconds gripper{200};

  /// One tick per primitive.
  static MotionTiming per_tick(std::chrono::milliseconds tick) { return {tick, tick}; }
};

/// The binding no longer matches the world.
class StaleBinding : public Error {
 public:
  using Error::Error;
};

/// Indices of the gripper toggles inside a move plan.
inline constexpr std::size_t kGraspIndex = 2;
inline constexpr std::size_t kReleaseIndex = 7;
inline constexpr std::size_t kMovePlanLength = 10;

/// Objects the robot can see: detectable categories inside the field of view.
std::vector<WorkspaceObject> robot_visible(const World& world);

/// Where a bound action will put the object. Grid cells are chosen here,
/// against the current world. Throws StaleBinding.
Point resolve_destination(const ActionBinding& binding, const World& world,
                          const EngineOptions& options);

/// Eight moves and two gripper toggles: approach, descend, close, ascend,
/// transit, approach, descend, open, ascend, home. Throws StaleBinding when
/// the object or its destination is no longer valid.
std::vector<Primitive> plan_action(const ActionBinding& binding, const World& world, Point home,
                                   const MotionTiming& timing, const EngineOptions& options);

/// Runs one bound rule/button at a time, primitive by primitive. World
/// mutations happen only when a gripper toggle completes.
class Executor {
 public:
  Executor(Point home, MotionTiming timing, EngineOptions options);

  bool idle() const { return !active_.has_value(); }
  /// Source id of the running binding.
  std::optional<std::string> running_source() const;
  std::optional<std::size_t> action_index() const;
  std::optional<std::size_t> primitive_index() const;
  const std::vector<Primitive>* current_plan() const;
  std::optional<ObjectId> held_object() const;
  Point robot_position() const { return position_; }
  /// True when the executor is stopped between primitives because of a pause.
  bool waiting_at_boundary() const;

  std::vector<Event> begin(Binding binding, World& world);
  std::vector<Event> step(World& world, std::chrono::milliseconds elapsed, bool paused);
  std::vector<Event> abort(World& world, const std::string& reason);

 private:
  struct Active {
    Binding binding;
    std::size_t action = 0;
    std::vector<Primitive> plan;
    Point destination;
    std::size_t primitive = 0;
    std::chrono::milliseconds progress{0};
    bool primitive_started = false;
    bool holding = false;
  };

  bool start_action(World& world, std::vector<Event>& events);
  bool start_primitive(World& world, std::vector<Event>& events);
  bool complete_primitive(World& world, std::vector<Event>& events);
  void validate_pickup(const World& world) const;
  void validate_destination(const World& world) const;
  Json action_ref() const;

  Point home_;
  Point position_;
  MotionTiming timing_;
  EngineOptions options_;
  std::optional<Active> active_;
};

}  // namespace slp
