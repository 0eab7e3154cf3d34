#include "slp/world.hpp"

#include <algorithm>
#include <random>

#include "slp/error.hpp"

namespace slp {

using json_util::point_json;

const Zone* PerceivedState::zone_by_color(std::string_view color) const {
  for (const auto& z : zones) {
    if (z.color == color) return &z;
  }
  return nullptr;
}

const WorkspaceObject* PerceivedState::find(ObjectId id) const {
  auto it = std::lower_bound(objects.begin(), objects.end(), id,
                             [](const WorkspaceObject& o, ObjectId v) { return o.id < v; });
  return (it != objects.end() && it->id == id) ? &*it : nullptr;
}

World::World(std::shared_ptr<const Scenario> scenario) : scenario_(std::move(scenario)) {
  reset();
}

const WorkspaceObject* World::find(ObjectId id) const {
  auto it = std::lower_bound(objects_.begin(), objects_.end(), id,
                             [](const WorkspaceObject& o, ObjectId v) { return o.id < v; });
  return (it != objects_.end() && it->id == id) ? &*it : nullptr;
}

const WorkspaceObject& World::get(ObjectId id) const {
  if (const auto* obj = find(id)) return *obj;
  throw ReferenceError("unknown object #" + std::to_string(id));
}

WorkspaceObject& World::mut(ObjectId id) { return const_cast<WorkspaceObject&>(get(id)); }

std::string World::table_name(Point p) const {
  const TableRegion* t = scenario_->table_at(p);
  return t != nullptr ? t->name : std::string();
}

ObjectId World::spawn(std::string_view category, Point position, std::optional<std::string> state,
                      std::optional<std::string> label) {
  const CategorySpec& cat = scenario_->category(category);
  if (state && !cat.has_state(*state)) {
    throw ReferenceError("'" + *state + "' is not a state of '" + cat.name + "'");
  }
  WorkspaceObject obj;
  obj.id = next_id_++;
  obj.category = cat.name;
  obj.position = position;
  obj.table = table_name(position);
  obj.state = state ? state : cat.default_state;
  obj.label = std::move(label);
  objects_.push_back(std::move(obj));
  return objects_.back().id;
}

void World::detach(WorkspaceObject& obj) {
  if (!obj.contained_in) return;
  auto& holder = mut(*obj.contained_in);
  std::erase(holder.attached, obj.id);
  obj.contained_in.reset();
}

void World::shift_riders(const WorkspaceObject& obj) {
  for (ObjectId rider : obj.attached) {
    auto& r = mut(rider);
    r.position = obj.position;
    r.table = obj.table;
    shift_riders(r);
  }
}

void World::move_to(ObjectId id, Point position) {
  auto& obj = mut(id);
  detach(obj);
  obj.position = position;
  obj.table = table_name(position);
  shift_riders(obj);
}

void World::set_held(ObjectId id, bool held) {
  auto& obj = mut(id);
  obj.held = held;
  for (ObjectId rider : obj.attached) set_held(rider, held);
}

bool World::is_inside(ObjectId inner, ObjectId outer) const {
  const WorkspaceObject* cur = find(inner);
  while (cur != nullptr && cur->contained_in) {
    if (*cur->contained_in == outer) return true;
    cur = find(*cur->contained_in);
  }
  return false;
}

void World::apply_combination(WorkspaceObject& part, WorkspaceObject& target,
                              const CombinationRule& rule, Json& out) {
  out["target_state"] = {{"from", *target.state}, {"to", rule.resulting_target_state}};
  target.state = rule.resulting_target_state;
  if (rule.part_fate == PartFate::absorbed) {
    out["part_fate"] = "absorbed";
    remove(part.id);
  } else {
    out["part_fate"] = "attached";
    detach(part);
    part.contained_in = target.id;
    part.position = target.position;
    part.table = target.table;
    target.attached.push_back(part.id);
    shift_riders(part);
  }
}

Json World::insert_into(ObjectId part_id, ObjectId container_id) {
  if (part_id == container_id) throw StateError("an object cannot go inside itself");
  auto& part = mut(part_id);
  auto& container = mut(container_id);
  if (is_inside(container_id, part_id)) {
    throw StateError("#" + std::to_string(container_id) + " is inside #" +
                     std::to_string(part_id));
  }
  Json out = {{"part", part_id}, {"target", container_id}};
  if (scenario_->pairs_combine(part.category, container.category)) {
    const CombinationRule* rule =
        container.state ? scenario_->find_combination(part.category, container.category,
                                                      *container.state)
                        : nullptr;
    if (rule == nullptr) {
      throw StateError("no combination of " + part.category + " with " + container.category +
                       " in state '" + container.state.value_or("") + "'");
    }
    apply_combination(part, container, *rule, out);
    return out;
  }
  if (!scenario_->category(container.category).is_container) {
    throw StateError("'" + container.category + "' is not a container");
  }
  detach(part);
  part.contained_in = container_id;
  part.position = container.position;
  part.table = container.table;
  container.attached.push_back(part_id);
  shift_riders(part);
  out["part_fate"] = "contained";
  return out;
}

Json World::combine(ObjectId part_id, ObjectId target_id) {
  if (part_id == target_id) throw StateError("an object cannot combine with itself");
  auto& part = mut(part_id);
  auto& target = mut(target_id);
  const CombinationRule* rule =
      target.state
          ? scenario_->find_combination(part.category, target.category, *target.state)
          : nullptr;
  if (rule == nullptr) {
    throw StateError("no combination rule for " + part.category + " onto " + target.category +
                     " in state '" + target.state.value_or("") + "'");
  }
  if (is_inside(target_id, part_id)) {
    throw StateError("#" + std::to_string(target_id) + " is inside #" + std::to_string(part_id));
  }
  Json out = {{"part", part_id}, {"target", target_id}};
  apply_combination(part, target, *rule, out);
  return out;
}

void World::remove(ObjectId id) {
  auto& obj = mut(id);
  detach(obj);
  std::vector<ObjectId> riders = obj.attached;
  for (ObjectId r : riders) {
    mut(r).contained_in.reset();
    remove(r);
  }
  std::erase_if(objects_, [id](const WorkspaceObject& o) { return o.id == id; });
}

void World::reset() {
  objects_.clear();
  for (const auto& p : scenario_->initial_objects) {
    spawn(p.category, p.position, p.state, p.label);
  }
}

bool World::containment_consistent() const {
  for (const auto& obj : objects_) {
    std::size_t steps = 0;
    const WorkspaceObject* cur = &obj;
    while (cur->contained_in) {
      const WorkspaceObject* up = find(*cur->contained_in);
      if (up == nullptr) return false;
      if (std::find(up->attached.begin(), up->attached.end(), cur->id) == up->attached.end()) {
        return false;
      }
      if (!(up->position == cur->position)) return false;
      if (++steps > objects_.size()) return false;
      cur = up;
    }
  }
  return true;
}

namespace {

struct ApplyHumanOp {
  World& world;

  Json operator()(const Relocate& op) const {
    const auto& obj = world.get(op.object);
    if (obj.held) throw StateError("#" + std::to_string(op.object) + " is in the robot gripper");
    Json out = {{"op", "relocate"}, {"object", op.object}, {"from", point_json(obj.position)}};
    if (const auto* p = std::get_if<Point>(&op.destination)) {
      if (world.scenario().table_at(*p) == nullptr) {
        throw StateError("position is not on any table");
      }
      world.move_to(op.object, *p);
      out["to"] = point_json(*p);
    } else {
      const ObjectId container = std::get<ObjectId>(op.destination);
      if (world.get(container).held) {
        throw StateError("#" + std::to_string(container) + " is in the robot gripper");
      }
      // Validate on a copy so a rejected insert leaves the world untouched.
      World trial = world;
      out["effect"] = trial.insert_into(op.object, container);
      world = std::move(trial);
      out["into"] = container;
      out["to"] = point_json(world.get(container).position);
    }
    return out;
  }

  Json operator()(const Combine& op) const {
    if (world.get(op.part).held || world.get(op.target).held) {
      throw StateError("cannot combine an object held by the robot");
    }
    World trial = world;
    Json effect = trial.combine(op.part, op.target);
    world = std::move(trial);
    return {{"op", "combine"}, {"part", op.part}, {"target", op.target}, {"effect", effect}};
  }

  Json operator()(const Remove& op) const {
    if (world.get(op.object).held) {
      throw StateError("#" + std::to_string(op.object) + " is in the robot gripper");
    }
    world.remove(op.object);
    return {{"op", "remove"}, {"object", op.object}};
  }

  Json operator()(const Spawn& op) const {
    if (world.scenario().table_at(op.position) == nullptr) {
      throw StateError("position is not on any table");
    }
    const ObjectId id = world.spawn(op.category, op.position);
    return {{"op", "spawn"}, {"object", id}, {"category", op.category},
            {"to", point_json(op.position)}};
  }
};

}  // namespace

Json apply_human_action(World& world, const HumanOp& op) {
  return std::visit(ApplyHumanOp{world}, op);
}

namespace {

double jitter(std::uint64_t seed, std::int64_t tick, ObjectId id, int axis, double amplitude) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tick), static_cast<std::uint32_t>(id),
                    static_cast<std::uint32_t>(axis)};
  std::mt19937_64 rng(seq);
  // Map the top 53 bits to [-1, 1]; std distributions are not portable.
  const double unit = static_cast<double>(rng() >> 11) / static_cast<double>(1ULL << 53);
  return amplitude * (2.0 * unit - 1.0);
}

}  // namespace

PerceivedState perceived_view(const World& world, std::span<const Zone> zones,
                              const PerceptionConfig& config, std::int64_t tick,
                              std::uint64_t seed) {
  PerceivedState view;
  view.tick = tick;
  view.zones.assign(zones.begin(), zones.end());
  for (const auto& obj : world.objects()) {
    if (!config.is_detectable(obj.category)) continue;
    if (config.field_of_view && !config.field_of_view->contains(obj.position)) continue;
    WorkspaceObject seen = obj;
    if (config.position_noise > 0.0) {
      seen.position.x += jitter(seed, tick, obj.id, 0, config.position_noise);
      seen.position.y += jitter(seed, tick, obj.id, 1, config.position_noise);
    }
    view.objects.push_back(std::move(seen));
  }
  return view;
}

std::optional<Point> next_free_cell(std::span<const WorkspaceObject> objects, const Rect& zone,
                                    int columns, int rows, double clearance) {
  for (const Point cell : grid_cells(zone, columns, rows)) {
    const bool occupied = std::any_of(objects.begin(), objects.end(), [&](const auto& o) {
      return o.top_level() && !o.held && distance(o.position, cell) <= clearance;
    });
    if (!occupied) return cell;
  }
  return std::nullopt;
}

std::optional<Point> next_free_cell(const World& world, const Rect& zone, int columns, int rows,
                                    double clearance) {
  return next_free_cell(world.objects(), zone, columns, rows, clearance);
}

Json object_json(const WorkspaceObject& obj) {
  Json j = {{"id", obj.id}, {"category", obj.category}, {"position", point_json(obj.position)},
            {"table", obj.table}};
  if (obj.state) j["state"] = *obj.state;
  if (obj.contained_in) j["in"] = *obj.contained_in;
  if (obj.held) j["held"] = true;
  return j;
}

}  // namespace slp
