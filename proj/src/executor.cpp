#include "slp/executor.hpp"

#include <algorithm>

namespace slp {

using json_util::point_json;

std::vector<WorkspaceObject> robot_visible(const World& world) {
  const PerceptionConfig& config = world.scenario().perception;
  std::vector<WorkspaceObject> out;
  for (const auto& obj : world.objects()) {
    if (!config.is_detectable(obj.category)) continue;
    if (config.field_of_view && !config.field_of_view->contains(obj.position)) continue;
    out.push_back(obj);
  }
  return out;
}

namespace {

const WorkspaceObject& check_candidate(const ActionBinding& ab, const World& world) {
  const WorkspaceObject* obj = world.find(ab.object);
  if (obj == nullptr) throw StaleBinding("bound object is gone");
  if (obj->held) throw StaleBinding("bound object is already held");
  if (!obj->top_level()) throw StaleBinding("bound object is inside another object");
  if (!in_zone(*obj, ab.source)) throw StaleBinding("bound object left the source zone");
  for (const auto& rect : ab.zone_filters) {
    if (!in_zone(*obj, rect)) throw StaleBinding("bound object no longer matches the conditions");
  }
  for (const auto& state : ab.state_filters) {
    if (obj->state != state) throw StaleBinding("bound object changed state");
  }
  return *obj;
}

const WorkspaceObject& check_container(const ActionBinding& ab, const World& world) {
  const ObjectId id = std::get<ObjectId>(ab.target);
  const WorkspaceObject* c = world.find(id);
  if (c == nullptr) throw StaleBinding("target container is gone");
  if (c->held || !c->top_level()) throw StaleBinding("target container was picked up");
  if (!in_zone(*c, ab.destination)) throw StaleBinding("target container left the destination zone");
  if (!container_accepts(ab.action.category, *c, world.scenario())) {
    throw StaleBinding("target container no longer accepts " + ab.action.category);
  }
  return *c;
}

}  // namespace

Point resolve_destination(const ActionBinding& ab, const World& world,
                          const EngineOptions& options) {
  if (const auto* grid = std::get_if<Grid>(&ab.action.placement)) {
    auto visible = robot_visible(world);
    std::erase_if(visible, [&](const WorkspaceObject& o) { return o.id == ab.object; });
    auto cell = next_free_cell(visible, ab.destination, grid->columns, grid->rows,
                               options.grid_clearance);
    if (!cell) throw StaleBinding("destination grid is full");
    return *cell;
  }
  if (std::holds_alternative<InsideObject>(ab.action.placement)) {
    return check_container(ab, world).position;
  }
  return ab.destination.center();
}

std::vector<Primitive> plan_action(const ActionBinding& ab, const World& world, Point home,
                                   const MotionTiming& timing, const EngineOptions& options) {
  const Point pickup = check_candidate(ab, world).position;
  const Point dest = resolve_destination(ab, world, options);
  const Point transit{(pickup.x + dest.x) / 2.0, (pickup.y + dest.y) / 2.0};
  auto move = [&](Point p, std::string phase) {
    return Primitive{PrimitiveKind::MoveTo, p, std::move(phase), GripperCommand::Open, timing.move};
  };
  auto toggle = [&](Point p, std::string phase, GripperCommand cmd) {
    return Primitive{PrimitiveKind::ToggleGripper, p, std::move(phase), cmd, timing.gripper};
  };
  return {
      move(pickup, "above_source"),
      move(pickup, "descend_source"),
      toggle(pickup, "grasp", GripperCommand::Close),
      move(pickup, "ascend_source"),
      move(transit, "transit"),
      move(dest, "above_destination"),
      move(dest, "descend_destination"),
      toggle(dest, "release", GripperCommand::Open),
      move(dest, "ascend_destination"),
      move(home, "home"),
  };
}

Executor::Executor(Point home, MotionTiming timing, EngineOptions options)
    : home_(home), position_(home), timing_(timing), options_(options) {}

std::optional<std::string> Executor::running_source() const {
  if (!active_) return std::nullopt;
  return active_->binding.source;
}

std::optional<std::size_t> Executor::action_index() const {
  if (!active_) return std::nullopt;
  return active_->action;
}

std::optional<std::size_t> Executor::primitive_index() const {
  if (!active_) return std::nullopt;
  return active_->primitive;
}

const std::vector<Primitive>* Executor::current_plan() const {
  return active_ ? &active_->plan : nullptr;
}

std::optional<ObjectId> Executor::held_object() const {
  if (!active_ || !active_->holding) return std::nullopt;
  return active_->binding.actions[active_->action].object;
}

bool Executor::waiting_at_boundary() const { return active_ && !active_->primitive_started; }

Json Executor::action_ref() const {
  const auto& ab = active_->binding.actions[active_->action];
  return {{"source", active_->binding.source},
          {"action_index", active_->action},
          {"object", ab.object}};
}

void Executor::validate_pickup(const World& world) const {
  const auto& ab = active_->binding.actions[active_->action];
  const auto& obj = check_candidate(ab, world);
  if (!(obj.position == ab.pickup)) throw StaleBinding("bound object was moved");
}

void Executor::validate_destination(const World& world) const {
  const auto& ab = active_->binding.actions[active_->action];
  if (std::holds_alternative<InsideObject>(ab.action.placement)) {
    if (!(check_container(ab, world).position == active_->destination)) {
      throw StaleBinding("target container was moved");
    }
  } else if (std::holds_alternative<Grid>(ab.action.placement)) {
    for (const auto& o : robot_visible(world)) {
      if (o.id != ab.object && o.top_level() && !o.held &&
          distance(o.position, active_->destination) <= options_.grid_clearance) {
        throw StaleBinding("destination cell is now occupied");
      }
    }
  }
}

bool Executor::start_action(World& world, std::vector<Event>& events) {
  auto& ab = active_->binding.actions[active_->action];
  try {
    ab.pickup = check_candidate(ab, world).position;
    active_->plan = plan_action(ab, world, home_, timing_, options_);
  } catch (const StaleBinding& e) {
    auto aborted = abort(world, e.what());
    events.insert(events.end(), aborted.begin(), aborted.end());
    return false;
  }
  active_->destination = active_->plan[kReleaseIndex].target;
  active_->primitive = 0;
  active_->progress = std::chrono::milliseconds{0};
  active_->primitive_started = false;
  active_->holding = false;

  Json payload = action_ref();
  payload["category"] = ab.action.category;
  payload["from"] = ab.action.source_zone;
  payload["to"] = ab.action.destination_zone;
  payload["placement"] = action_json(ab.action)["placement"];
  payload["destination"] = point_json(active_->destination);
  if (const auto* container = std::get_if<ObjectId>(&ab.target)) payload["container"] = *container;
  events.push_back({EventKind::ActionStarted, std::move(payload)});
  return true;
}

bool Executor::start_primitive(World& world, std::vector<Event>& events) {
  const std::size_t i = active_->primitive;
  try {
    if (i <= kGraspIndex) validate_pickup(world);
    if (i > kGraspIndex + 2 && i <= kReleaseIndex) validate_destination(world);
  } catch (const StaleBinding& e) {
    auto aborted = abort(world, e.what());
    events.insert(events.end(), aborted.begin(), aborted.end());
    return false;
  }
  const Primitive& p = active_->plan[i];
  Json payload = {{"source", active_->binding.source},
                  {"action_index", active_->action},
                  {"index", i},
                  {"phase", p.phase}};
  if (p.kind == PrimitiveKind::MoveTo) {
    payload["kind"] = "move_to";
    payload["target"] = point_json(p.target);
  } else {
    payload["kind"] = "toggle_gripper";
    payload["gripper"] = p.gripper == GripperCommand::Close ? "close" : "open";
  }
  events.push_back({EventKind::PrimitiveStarted, std::move(payload)});
  active_->primitive_started = true;
  return true;
}

bool Executor::complete_primitive(World& world, std::vector<Event>& events) {
  const std::size_t i = active_->primitive;
  const Primitive p = active_->plan[i];
  const auto& ab = active_->binding.actions[active_->action];
  try {
    if (i == kGraspIndex) {
      validate_pickup(world);
      world.set_held(ab.object, true);
      active_->holding = true;
    } else if (i == kReleaseIndex) {
      validate_destination(world);
      world.set_held(ab.object, false);
      active_->holding = false;
      if (const auto* container = std::get_if<ObjectId>(&ab.target);
          container && std::holds_alternative<InsideObject>(ab.action.placement)) {
        world.insert_into(ab.object, *container);
      } else {
        world.move_to(ab.object, active_->destination);
      }
    }
  } catch (const StaleBinding& e) {
    auto aborted = abort(world, e.what());
    events.insert(events.end(), aborted.begin(), aborted.end());
    return false;
  }
  position_ = p.target;
  events.push_back({EventKind::PrimitiveCompleted,
                    {{"source", active_->binding.source},
                     {"action_index", active_->action},
                     {"index", i},
                     {"phase", p.phase}}});
  active_->primitive += 1;
  active_->progress = std::chrono::milliseconds{0};
  active_->primitive_started = false;
  if (active_->primitive < active_->plan.size()) return true;

  Json done = action_ref();
  if (const WorkspaceObject* obj = world.find(ab.object)) {
    done["position"] = point_json(obj->position);
    if (obj->contained_in) done["container"] = *obj->contained_in;
  } else {
    done["absorbed"] = true;
  }
  events.push_back({EventKind::ActionCompleted, std::move(done)});
  active_->action += 1;
  if (active_->action == active_->binding.actions.size()) {
    active_.reset();
    return false;
  }
  return start_action(world, events);
}

std::vector<Event> Executor::begin(Binding binding, World& world) {
  if (active_) throw StateError("executor is busy");
  if (binding.actions.empty()) throw StateError("nothing to execute");
  std::vector<Event> events;
  active_.emplace();
  active_->binding = std::move(binding);
  if (start_action(world, events)) start_primitive(world, events);
  return events;
}

std::vector<Event> Executor::step(World& world, std::chrono::milliseconds elapsed, bool paused) {
  std::vector<Event> events;
  auto budget = elapsed;
  while (active_) {
    if (!active_->primitive_started) {
      if (paused) break;
      if (!start_primitive(world, events)) break;
    }
    const auto need = active_->plan[active_->primitive].duration - active_->progress;
    if (budget < need) {
      active_->progress += budget;
      break;
    }
    budget -= need;
    if (!complete_primitive(world, events)) break;
  }
  return events;
}

std::vector<Event> Executor::abort(World& world, const std::string& reason) {
  std::vector<Event> events;
  if (!active_) return events;
  const auto& ab = active_->binding.actions[active_->action];
  if (active_->holding) {
    // Put the object back where it was picked up.
    world.set_held(ab.object, false);
    if (world.find(ab.object) != nullptr) world.move_to(ab.object, ab.pickup);
  }
  Json payload = action_ref();
  payload["reason"] = reason;
  events.push_back({EventKind::ActionAborted, std::move(payload)});
  position_ = home_;
  active_.reset();
  return events;
}

}  // namespace slp
