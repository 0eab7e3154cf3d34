#include "slp/scenario.hpp"

#include <algorithm>

#include "slp/error.hpp"

namespace slp {

using namespace json_util;

bool CategorySpec::has_state(std::string_view state) const {
  return std::find(states.begin(), states.end(), state) != states.end();
}

bool PerceptionConfig::is_detectable(std::string_view category) const {
  auto it = detectable.find(category);
  return it != detectable.end() && it->second;
}

const CategorySpec* Scenario::find_category(std::string_view name) const {
  for (const auto& c : categories) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

const CategorySpec& Scenario::category(std::string_view name) const {
  if (const auto* c = find_category(name)) return *c;
  throw ReferenceError("unknown category '" + std::string(name) + "'");
}

const TableRegion* Scenario::table_at(Point p) const {
  for (const auto& t : tables) {
    if (t.rect.contains(p)) return &t;
  }
  return nullptr;
}

const TableArea* Scenario::find_area(std::string_view name) const {
  for (const auto& t : tables) {
    for (const auto& a : t.areas) {
      if (a.name == name) return &a;
    }
  }
  return nullptr;
}

const CombinationRule* Scenario::find_combination(std::string_view part, std::string_view target,
                                                  std::string_view target_state) const {
  for (const auto& c : combinations) {
    if (c.part_category == part && c.target_category == target &&
        c.required_target_state == target_state) {
      return &c;
    }
  }
  return nullptr;
}

bool Scenario::pairs_combine(std::string_view part, std::string_view target) const {
  return std::any_of(combinations.begin(), combinations.end(), [&](const CombinationRule& c) {
    return c.part_category == part && c.target_category == target;
  });
}

namespace {

std::vector<std::string> parse_states(const Json& obj, const std::string& path) {
  std::vector<std::string> states;
  const Json* v = optional_field(obj, "states");
  if (v == nullptr) return states;
  if (!v->is_array()) throw ParseError(child(path, "states"), "expected an array of names");
  for (std::size_t i = 0; i < v->size(); ++i) {
    if (!(*v)[i].is_string()) throw ParseError(child(child(path, "states"), i), "expected a string");
    states.push_back((*v)[i].get<std::string>());
  }
  return states;
}

const Json& array_field(const Json& doc, std::string_view key, const Json& empty) {
  const Json* v = optional_field(doc, key);
  if (v == nullptr) return empty;
  if (!v->is_array()) throw ParseError("/" + std::string(key), "expected an array");
  return *v;
}

}  // namespace

Scenario load_scenario(std::string_view document) {
  const Json doc = parse_document(document);
  if (!doc.is_object()) throw ParseError("/", "expected an object");
  const Json empty = Json::array();

  Scenario s;
  s.name = get_string(doc, "name", "");
  if (const Json* home = optional_field(doc, "robot_home")) {
    s.robot_home = to_point(*home, "/robot_home");
  }

  const Json& tables = array_field(doc, "tables", empty);
  for (std::size_t i = 0; i < tables.size(); ++i) {
    const std::string path = child("/tables", i);
    TableRegion t;
    t.name = get_string(tables[i], "name", path);
    t.rect = to_rect(field(tables[i], "rect", path), child(path, "rect"));
    if (const Json* areas = optional_field(tables[i], "areas")) {
      for (std::size_t j = 0; j < areas->size(); ++j) {
        const std::string apath = child(child(path, "areas"), j);
        TableArea a;
        a.name = get_string((*areas)[j], "name", apath);
        a.rect = to_rect(field((*areas)[j], "rect", apath), child(apath, "rect"));
        if (!t.rect.covers(a.rect)) throw ParseError(apath, "area lies outside its table");
        t.areas.push_back(std::move(a));
      }
    }
    for (const auto& other : s.tables) {
      if (other.name == t.name) throw ParseError(path, "duplicate table '" + t.name + "'");
      const bool overlap = t.rect.x < other.rect.right() && other.rect.x < t.rect.right() &&
                           t.rect.y < other.rect.bottom() && other.rect.y < t.rect.bottom();
      if (overlap) throw ParseError(path, "table overlaps '" + other.name + "'");
    }
    s.tables.push_back(std::move(t));
  }

  const Json& categories = array_field(doc, "categories", empty);
  for (std::size_t i = 0; i < categories.size(); ++i) {
    const std::string path = child("/categories", i);
    CategorySpec c;
    c.name = get_string(categories[i], "name", path);
    c.detectable = get_bool(categories[i], "detectable", path, true);
    c.is_container = get_bool(categories[i], "container", path, false);
    c.states = parse_states(categories[i], path);
    c.default_state = get_optional_string(categories[i], "default_state", path);
    if (s.find_category(c.name) != nullptr) {
      throw ParseError(path, "duplicate category '" + c.name + "'");
    }
    if (c.default_state && !c.has_state(*c.default_state)) {
      throw ReferenceError(path + ": default state '" + *c.default_state +
                           "' is not a state of '" + c.name + "'");
    }
    if (!c.states.empty() && !c.default_state) c.default_state = c.states.front();
    s.perception.detectable[c.name] = c.detectable;
    s.categories.push_back(std::move(c));
  }

  const Json& objects = array_field(doc, "objects", empty);
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const std::string path = child("/objects", i);
    ObjectPlacement o;
    o.category = get_string(objects[i], "category", path);
    o.position = to_point(field(objects[i], "position", path), child(path, "position"));
    o.state = get_optional_string(objects[i], "state", path);
    o.label = get_optional_string(objects[i], "label", path);
    const CategorySpec* cat = s.find_category(o.category);
    if (cat == nullptr) {
      throw ReferenceError(path + ": unknown category '" + o.category + "'");
    }
    if (o.state && !cat->has_state(*o.state)) {
      throw ReferenceError(path + ": '" + *o.state + "' is not a state of '" + o.category + "'");
    }
    if (!o.state) o.state = cat->default_state;
    if (s.table_at(o.position) == nullptr) {
      throw ParseError(child(path, "position"), "object is not on any table");
    }
    s.initial_objects.push_back(std::move(o));
  }

  const Json& combinations = array_field(doc, "combinations", empty);
  for (std::size_t i = 0; i < combinations.size(); ++i) {
    const std::string path = child("/combinations", i);
    CombinationRule c;
    c.part_category = get_string(combinations[i], "part", path);
    c.target_category = get_string(combinations[i], "target", path);
    c.required_target_state = get_string(combinations[i], "required_state", path);
    c.resulting_target_state = get_string(combinations[i], "resulting_state", path);
    const std::string fate = get_string(combinations[i], "part_fate", path);
    if (fate == "absorbed") {
      c.part_fate = PartFate::absorbed;
    } else if (fate == "attached") {
      c.part_fate = PartFate::attached;
    } else {
      throw ParseError(child(path, "part_fate"), "expected 'absorbed' or 'attached'");
    }
    if (s.find_category(c.part_category) == nullptr) {
      throw ReferenceError(path + ": unknown category '" + c.part_category + "'");
    }
    const CategorySpec* target = s.find_category(c.target_category);
    if (target == nullptr) {
      throw ReferenceError(path + ": unknown category '" + c.target_category + "'");
    }
    for (const auto* state : {&c.required_target_state, &c.resulting_target_state}) {
      if (!target->has_state(*state)) {
        throw ReferenceError(path + ": '" + *state + "' is not a state of '" +
                             c.target_category + "'");
      }
    }
    s.combinations.push_back(std::move(c));
  }

  if (const Json* perception = optional_field(doc, "perception")) {
    const std::string path = "/perception";
    if (optional_field(*perception, "publish_period_ms") != nullptr) {
      const auto ms = get_int(*perception, "publish_period_ms", path);
      if (ms <= 0) throw ParseError(child(path, "publish_period_ms"), "must be positive");
      s.perception.publish_period = std::chrono::milliseconds(ms);
    }
    if (const Json* fov = optional_field(*perception, "field_of_view")) {
      s.perception.field_of_view = to_rect(*fov, child(path, "field_of_view"));
    }
    if (optional_field(*perception, "position_noise") != nullptr) {
      s.perception.position_noise = get_number(*perception, "position_noise", path);
      if (s.perception.position_noise < 0.0) {
        throw ParseError(child(path, "position_noise"), "must not be negative");
      }
    }
  }
  return s;
}

Scenario load_scenario_file(const std::string& path) { return load_scenario(read_file(path)); }

}  // namespace slp
