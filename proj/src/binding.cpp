#include "slp/binding.hpp"

#include <algorithm>
#include <iterator>

namespace slp {

namespace {

void warn_missing_zone(std::string_view color, std::vector<std::string>* warnings) {
  if (warnings != nullptr) {
    warnings->push_back("no " + std::string(color) + " zone; condition evaluates false");
  }
}

std::vector<ObjectId> ids_where(const PerceivedState& perceived, auto pred) {
  std::vector<ObjectId> ids;
  for (const auto& obj : perceived.objects) {
    if (pred(obj)) ids.push_back(obj.id);
  }
  return ids;
}

void intersect_into(std::vector<ObjectId>& acc, const std::vector<ObjectId>& other) {
  std::vector<ObjectId> out;
  std::set_intersection(acc.begin(), acc.end(), other.begin(), other.end(),
                        std::back_inserter(out));
  acc = std::move(out);
}

}  // namespace

bool evaluate_condition(const Condition& condition, const PerceivedState& perceived,
                        std::vector<std::string>* warnings) {
  const auto of_category = [&](const WorkspaceObject& o) { return o.category == condition.category; };
  if (const auto* in = std::get_if<IsIn>(&condition.predicate)) {
    const Zone* zone = perceived.zone_by_color(in->zone);
    if (zone == nullptr) {
      warn_missing_zone(in->zone, warnings);
      return false;
    }
    return std::any_of(perceived.objects.begin(), perceived.objects.end(), [&](const auto& o) {
      return of_category(o) && in_zone(o, zone->rect);
    });
  }
  if (const auto* out = std::get_if<IsNotIn>(&condition.predicate)) {
    const Zone* zone = perceived.zone_by_color(out->zone);
    if (zone == nullptr) {
      warn_missing_zone(out->zone, warnings);
      return false;
    }
    return std::none_of(perceived.objects.begin(), perceived.objects.end(), [&](const auto& o) {
      return of_category(o) && in_zone(o, zone->rect);
    });
  }
  const auto& state = std::get<HasState>(condition.predicate).state;
  return std::any_of(perceived.objects.begin(), perceived.objects.end(), [&](const auto& o) {
    return of_category(o) && o.state == state;
  });
}

std::vector<ObjectId> candidate_set(std::span<const Condition> conditions,
                                    const MoveAction& action, const PerceivedState& perceived) {
  const Zone* source = perceived.zone_by_color(action.source_zone);
  if (source == nullptr) return {};
  std::vector<ObjectId> result = ids_where(perceived, [&](const WorkspaceObject& o) {
    return o.category == action.category && o.top_level() && in_zone(o, source->rect);
  });
  for (const auto& c : conditions) {
    if (c.category != action.category) continue;
    if (const auto* in = std::get_if<IsIn>(&c.predicate)) {
      const Zone* zone = perceived.zone_by_color(in->zone);
      if (zone == nullptr) return {};
      intersect_into(result, ids_where(perceived, [&](const WorkspaceObject& o) {
                       return o.category == c.category && in_zone(o, zone->rect);
                     }));
    } else if (const auto* has = std::get_if<HasState>(&c.predicate)) {
      intersect_into(result, ids_where(perceived, [&](const WorkspaceObject& o) {
                       return o.category == c.category && o.state == has->state;
                     }));
    }
  }
  return result;
}

bool container_accepts(std::string_view part_category, const WorkspaceObject& container,
                       const Scenario& scenario) {
  if (!scenario.pairs_combine(part_category, container.category)) return true;
  return container.state.has_value() &&
         scenario.find_combination(part_category, container.category, *container.state) !=
             nullptr;
}

std::optional<Binding> bind_actions(std::string source, bool from_button,
                                    std::span<const Condition> conditions,
                                    std::span<const MoveAction> actions,
                                    const PerceivedState& perceived, const Scenario& scenario,
                                    const EngineOptions& options) {
  Binding binding{std::move(source), from_button, {}};
  for (const auto& action : actions) {
    const Zone* src = perceived.zone_by_color(action.source_zone);
    const Zone* dst = perceived.zone_by_color(action.destination_zone);
    if (src == nullptr || dst == nullptr) return std::nullopt;
    const auto candidates = candidate_set(conditions, action, perceived);
    if (candidates.empty()) return std::nullopt;

    ActionBinding ab;
    ab.action = action;
    ab.object = candidates.front();
    ab.pickup = perceived.find(ab.object)->position;
    ab.source = src->rect;
    ab.destination = dst->rect;
    for (const auto& c : conditions) {
      if (c.category != action.category) continue;
      if (const auto* in = std::get_if<IsIn>(&c.predicate)) {
        ab.zone_filters.push_back(perceived.zone_by_color(in->zone)->rect);
      } else if (const auto* has = std::get_if<HasState>(&c.predicate)) {
        ab.state_filters.push_back(has->state);
      }
    }

    if (const auto* grid = std::get_if<Grid>(&action.placement)) {
      auto cell = next_free_cell(perceived.objects, dst->rect, grid->columns, grid->rows,
                                 options.grid_clearance);
      if (!cell) return std::nullopt;
      ab.target = *cell;
    } else if (const auto* inside = std::get_if<InsideObject>(&action.placement)) {
      const WorkspaceObject* chosen = nullptr;
      for (const auto& o : perceived.objects) {
        if (o.id != ab.object && o.category == inside->container && o.top_level() &&
            in_zone(o, dst->rect) && container_accepts(action.category, o, scenario)) {
          chosen = &o;
          break;
        }
      }
      if (chosen == nullptr) return std::nullopt;
      ab.target = chosen->id;
    } else {
      ab.target = dst->rect.center();
    }
    binding.actions.push_back(std::move(ab));
  }
  return binding;
}

std::optional<Binding> bind_rule(const Rule& rule, const PerceivedState& perceived,
                                 const Scenario& scenario, const EngineOptions& options,
                                 std::vector<std::string>* warnings) {
  if (!rule.enabled) return std::nullopt;
  for (const auto& c : rule.conditions) {
    if (!evaluate_condition(c, perceived, warnings)) return std::nullopt;
  }
  return bind_actions(rule.id, false, rule.conditions, rule.actions, perceived, scenario, options);
}

std::vector<Binding> flag_executable(const Program& program, const PerceivedState& perceived,
                                     bool executor_idle, const Scenario& scenario,
                                     const EngineOptions& options,
                                     std::vector<std::string>* warnings) {
  std::vector<Binding> flags;
  if (!executor_idle || program.paused()) return flags;
  for (const auto& rule : program.rules()) {
    if (auto b = bind_rule(rule, perceived, scenario, options, warnings)) {
      flags.push_back(std::move(*b));
    }
  }
  for (const auto& button : program.buttons()) {
    if (!button.pending) continue;
    if (auto b = bind_actions(button.id, true, {}, button.actions, perceived, scenario, options)) {
      flags.push_back(std::move(*b));
    }
  }
  return flags;
}

Json binding_json(const Binding& binding) {
  Json actions = Json::array();
  for (const auto& ab : binding.actions) {
    Json a = {{"object", ab.object}};
    if (const auto* p = std::get_if<Point>(&ab.target)) {
      a["target"] = json_util::point_json(*p);
    } else {
      a["container"] = std::get<ObjectId>(ab.target);
    }
    actions.push_back(std::move(a));
  }
  return {{"source", binding.source}, {"actions", actions}};
}

}  // namespace slp
