#include "slp/program.hpp"

#include <algorithm>
#include <charconv>

#include "slp/error.hpp"

namespace slp {

using namespace json_util;

bool in_palette(std::string_view color) {
  return std::find(kZonePalette.begin(), kZonePalette.end(), color) != kZonePalette.end();
}

// PreferenceStore --------------------------------------------------------------

PreferenceStore::Key PreferenceStore::make_key(std::vector<std::string> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

void PreferenceStore::remember(const std::vector<std::string>& candidates,
                               const std::string& chosen) {
  Key key = make_key(candidates);
  if (key.size() < 2) throw StateError("a preference needs at least two candidates");
  if (!std::binary_search(key.begin(), key.end(), chosen)) {
    throw StateError("'" + chosen + "' is not one of the candidates");
  }
  entries_[std::move(key)] = chosen;
}

std::optional<std::string> PreferenceStore::lookup(
    const std::vector<std::string>& candidates) const {
  auto it = entries_.find(make_key(candidates));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void PreferenceStore::forget_id(std::string_view id) {
  std::erase_if(entries_, [&](const auto& e) {
    return std::find(e.first.begin(), e.first.end(), id) != e.first.end();
  });
}

// Program ------------------------------------------------------------------------

namespace {

std::int64_t id_suffix(std::string_view id) {
  std::int64_t n = 0;
  if (id.size() < 2) return 0;
  auto [ptr, ec] = std::from_chars(id.data() + 1, id.data() + id.size(), n);
  return (ec == std::errc() && ptr == id.data() + id.size()) ? n : 0;
}

template <typename T>
auto find_by_id(T& items, std::string_view id) -> decltype(&items.front()) {
  for (auto& item : items) {
    if (item.id == id) return &item;
  }
  return nullptr;
}

bool mentions_zone(const Rule& rule, std::string_view color) {
  for (const auto& c : rule.conditions) {
    if (const auto* in = std::get_if<IsIn>(&c.predicate); in && in->zone == color) return true;
    if (const auto* out = std::get_if<IsNotIn>(&c.predicate); out && out->zone == color) {
      return true;
    }
  }
  return std::any_of(rule.actions.begin(), rule.actions.end(), [&](const MoveAction& a) {
    return a.source_zone == color || a.destination_zone == color;
  });
}

}  // namespace

const Zone* Program::find_zone(std::string_view id) const { return find_by_id(zones_, id); }

const Zone* Program::zone_by_color(std::string_view color) const {
  for (const auto& z : zones_) {
    if (z.color == color) return &z;
  }
  return nullptr;
}

const Rule* Program::find_rule(std::string_view id) const { return find_by_id(rules_, id); }

const ManualTrigger* Program::find_button(std::string_view id) const {
  return find_by_id(buttons_, id);
}

Rule& Program::mut_rule(std::string_view id) {
  if (auto* r = find_by_id(rules_, id)) return *r;
  throw ReferenceError("unknown rule '" + std::string(id) + "'");
}

ManualTrigger& Program::mut_button(std::string_view id) {
  if (auto* b = find_by_id(buttons_, id)) return *b;
  throw ReferenceError("unknown button '" + std::string(id) + "'");
}

const Zone& Program::create_zone(std::string_view color, const Rect& rect, std::int64_t tick) {
  std::vector<std::string> issues;
  if (!in_palette(color)) issues.push_back("'" + std::string(color) + "' is not a palette color");
  if (zone_by_color(color) != nullptr) {
    issues.push_back("a " + std::string(color) + " zone already exists");
  }
  if (!(rect.width > 0.0) || !(rect.height > 0.0)) {
    issues.push_back("zone width and height must be positive");
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
  Zone z{"Z" + std::to_string(++zone_counter_), std::string(color), rect, tick};
  zones_.push_back(std::move(z));
  return zones_.back();
}

const Zone& Program::update_zone(std::string_view id, const Rect& rect) {
  auto* z = find_by_id(zones_, id);
  if (z == nullptr) throw ReferenceError("unknown zone '" + std::string(id) + "'");
  if (!(rect.width > 0.0) || !(rect.height > 0.0)) {
    throw ValidationError({"zone width and height must be positive"});
  }
  z->rect = rect;
  return *z;
}

std::vector<std::string> Program::delete_zone(std::string_view id) {
  auto it = std::find_if(zones_.begin(), zones_.end(), [&](const Zone& z) { return z.id == id; });
  if (it == zones_.end()) throw ReferenceError("unknown zone '" + std::string(id) + "'");
  const std::string color = it->color;
  zones_.erase(it);
  std::vector<std::string> disabled;
  for (auto& rule : rules_) {
    if (rule.enabled && mentions_zone(rule, color)) {
      rule.enabled = false;
      disabled.push_back(rule.id);
    }
  }
  return disabled;
}

const Rule& Program::create_rule(std::vector<Condition> conditions,
                                 std::vector<MoveAction> actions, const Scenario& scenario,
                                 std::int64_t tick) {
  std::vector<std::string> issues;
  if (conditions.empty()) issues.push_back("a rule needs at least one condition");
  if (actions.empty()) issues.push_back("a rule needs at least one action");
  auto c = check_conditions(conditions, scenario, &zones_);
  auto a = check_actions(actions, scenario, &zones_);
  issues.insert(issues.end(), c.begin(), c.end());
  issues.insert(issues.end(), a.begin(), a.end());
  if (!issues.empty()) throw ValidationError(std::move(issues));
  Rule r{"R" + std::to_string(++rule_counter_), std::move(conditions), std::move(actions), true,
         tick};
  rules_.push_back(std::move(r));
  return rules_.back();
}

void Program::delete_rule(std::string_view id) {
  mut_rule(id);
  std::erase_if(rules_, [&](const Rule& r) { return r.id == id; });
  preferences_.forget_id(id);
}

const ManualTrigger& Program::create_button(std::string label, std::vector<MoveAction> actions,
                                            const Scenario& scenario) {
  std::vector<std::string> issues;
  if (actions.empty()) issues.push_back("a button needs at least one action");
  auto a = check_actions(actions, scenario, &zones_);
  issues.insert(issues.end(), a.begin(), a.end());
  if (!issues.empty()) throw ValidationError(std::move(issues));
  ManualTrigger b{"B" + std::to_string(++button_counter_), std::move(label), std::move(actions),
                  false};
  buttons_.push_back(std::move(b));
  return buttons_.back();
}

void Program::press_button(std::string_view id) { mut_button(id).pending = true; }

void Program::consume_button(std::string_view id) { mut_button(id).pending = false; }

void Program::restore_zone(Zone zone) {
  zone_counter_ = std::max(zone_counter_, id_suffix(zone.id));
  // Replace in place so an update keeps the item's position.
  auto it = std::find_if(zones_.begin(), zones_.end(),
                         [&](const Zone& z) { return z.id == zone.id; });
  if (it != zones_.end()) {
    *it = std::move(zone);
  } else {
    zones_.push_back(std::move(zone));
  }
}

void Program::restore_rule(Rule rule) {
  rule_counter_ = std::max(rule_counter_, id_suffix(rule.id));
  auto it = std::find_if(rules_.begin(), rules_.end(),
                         [&](const Rule& r) { return r.id == rule.id; });
  if (it != rules_.end()) {
    *it = std::move(rule);
  } else {
    rules_.push_back(std::move(rule));
  }
}

void Program::restore_button(ManualTrigger button) {
  button_counter_ = std::max(button_counter_, id_suffix(button.id));
  auto it = std::find_if(buttons_.begin(), buttons_.end(),
                         [&](const ManualTrigger& b) { return b.id == button.id; });
  if (it != buttons_.end()) {
    *it = std::move(button);
  } else {
    buttons_.push_back(std::move(button));
  }
}

void Program::set_rule_enabled(std::string_view id, bool enabled) { mut_rule(id).enabled = enabled; }

std::vector<std::string> Program::validate(const Scenario& scenario) const {
  std::vector<std::string> issues;
  for (std::size_t i = 0; i < zones_.size(); ++i) {
    if (!in_palette(zones_[i].color)) {
      issues.push_back("zone " + zones_[i].id + ": '" + zones_[i].color +
                       "' is not a palette color");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (zones_[j].color == zones_[i].color) {
        issues.push_back("zones " + zones_[j].id + " and " + zones_[i].id + " share color " +
                         zones_[i].color);
      }
    }
  }
  for (const auto& rule : rules_) {
    if (rule.conditions.empty()) issues.push_back("rule " + rule.id + ": no conditions");
    if (rule.actions.empty()) issues.push_back("rule " + rule.id + ": no actions");
    for (const auto& issue : check_conditions(rule.conditions, scenario, &zones_)) {
      issues.push_back("rule " + rule.id + ": " + issue);
    }
    for (const auto& issue : check_actions(rule.actions, scenario, &zones_)) {
      issues.push_back("rule " + rule.id + ": " + issue);
    }
  }
  for (const auto& button : buttons_) {
    if (button.actions.empty()) issues.push_back("button " + button.id + ": no actions");
    for (const auto& issue : check_actions(button.actions, scenario, &zones_)) {
      issues.push_back("button " + button.id + ": " + issue);
    }
  }
  for (const auto& [key, chosen] : preferences_.entries()) {
    for (const auto& id : key) {
      if (find_rule(id) == nullptr && find_button(id) == nullptr) {
        issues.push_back("preference refers to unknown rule or button '" + id + "'");
      }
    }
  }
  return issues;
}

// Reference checks --------------------------------------------------------------

namespace {

void check_zone(std::string_view color, const std::vector<Zone>* zones, const std::string& where,
                std::vector<std::string>& issues) {
  if (zones == nullptr) return;
  const bool live = std::any_of(zones->begin(), zones->end(),
                                [&](const Zone& z) { return z.color == color; });
  if (!live) issues.push_back(where + ": no " + std::string(color) + " zone");
}

}  // namespace

std::vector<std::string> check_conditions(const std::vector<Condition>& conditions,
                                          const Scenario& scenario,
                                          const std::vector<Zone>* zones) {
  std::vector<std::string> issues;
  for (std::size_t i = 0; i < conditions.size(); ++i) {
    const Condition& c = conditions[i];
    const std::string where = "condition " + std::to_string(i + 1);
    const CategorySpec* cat = scenario.find_category(c.category);
    if (cat == nullptr) issues.push_back(where + ": unknown category '" + c.category + "'");
    if (const auto* in = std::get_if<IsIn>(&c.predicate)) {
      check_zone(in->zone, zones, where, issues);
    } else if (const auto* out = std::get_if<IsNotIn>(&c.predicate)) {
      check_zone(out->zone, zones, where, issues);
    } else {
      const auto& state = std::get<HasState>(c.predicate).state;
      if (cat != nullptr && !cat->has_state(state)) {
        issues.push_back(where + ": '" + state + "' is not a state of '" + c.category + "'");
      }
    }
  }
  return issues;
}

std::vector<std::string> check_actions(const std::vector<MoveAction>& actions,
                                       const Scenario& scenario, const std::vector<Zone>* zones) {
  std::vector<std::string> issues;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const MoveAction& a = actions[i];
    const std::string where = "action " + std::to_string(i + 1);
    if (scenario.find_category(a.category) == nullptr) {
      issues.push_back(where + ": unknown category '" + a.category + "'");
    }
    check_zone(a.source_zone, zones, where, issues);
    check_zone(a.destination_zone, zones, where, issues);
    if (const auto* grid = std::get_if<Grid>(&a.placement)) {
      if (grid->columns < 1 || grid->rows < 1) {
        issues.push_back(where + ": grid needs at least one column and one row");
      }
    } else if (const auto* inside = std::get_if<InsideObject>(&a.placement)) {
      const CategorySpec* cat = scenario.find_category(inside->container);
      if (cat == nullptr) {
        issues.push_back(where + ": unknown category '" + inside->container + "'");
      } else if (!cat->is_container) {
        issues.push_back(where + ": '" + inside->container + "' is not a container");
      }
    }
  }
  return issues;
}

// Serialization -------------------------------------------------------------------

Json condition_json(const Condition& c) {
  Json j = {{"category", c.category}};
  if (const auto* in = std::get_if<IsIn>(&c.predicate)) {
    j["predicate"] = "is_in";
    j["zone"] = in->zone;
  } else if (const auto* out = std::get_if<IsNotIn>(&c.predicate)) {
    j["predicate"] = "is_not_in";
    j["zone"] = out->zone;
  } else {
    j["predicate"] = "has_state";
    j["state"] = std::get<HasState>(c.predicate).state;
  }
  return j;
}

Json action_json(const MoveAction& a) {
  Json placement;
  if (const auto* grid = std::get_if<Grid>(&a.placement)) {
    placement = {{"kind", "grid"}, {"columns", grid->columns}, {"rows", grid->rows}};
  } else if (const auto* inside = std::get_if<InsideObject>(&a.placement)) {
    placement = {{"kind", "inside"}, {"object", inside->container}};
  } else {
    placement = {{"kind", "middle"}};
  }
  return {{"category", a.category},
          {"from", a.source_zone},
          {"to", a.destination_zone},
          {"placement", placement}};
}

Json zone_json(const Zone& z) {
  return {{"id", z.id}, {"color", z.color}, {"rect", rect_json(z.rect)},
          {"created_at", z.created_at}};
}

Json rule_json(const Rule& r) {
  Json conditions = Json::array();
  for (const auto& c : r.conditions) conditions.push_back(condition_json(c));
  Json actions = Json::array();
  for (const auto& a : r.actions) actions.push_back(action_json(a));
  return {{"id", r.id},           {"conditions", conditions}, {"actions", actions},
          {"enabled", r.enabled}, {"created_at", r.created_at}};
}

Json button_json(const ManualTrigger& b) {
  Json actions = Json::array();
  for (const auto& a : b.actions) actions.push_back(action_json(a));
  return {{"id", b.id}, {"label", b.label}, {"actions", actions}, {"pending", b.pending}};
}

Json Program::to_json() const {
  Json zones = Json::array();
  for (const auto& z : zones_) zones.push_back(zone_json(z));
  Json rules = Json::array();
  for (const auto& r : rules_) rules.push_back(rule_json(r));
  Json buttons = Json::array();
  for (const auto& b : buttons_) buttons.push_back(button_json(b));
  Json prefs = Json::array();
  for (const auto& [key, chosen] : preferences_.entries()) {
    prefs.push_back({{"candidates", key}, {"chosen", chosen}});
  }
  return {{"zones", zones},
          {"rules", rules},
          {"buttons", buttons},
          {"preferences", prefs},
          {"paused", paused_},
          {"next_ids",
           {{"zone", zone_counter_ + 1}, {"rule", rule_counter_ + 1},
            {"button", button_counter_ + 1}}}};
}

Condition parse_condition(const Json& j, const std::string& path) {
  Condition c;
  c.category = get_string(j, "category", path);
  const std::string predicate = get_string(j, "predicate", path);
  if (predicate == "is_in") {
    c.predicate = IsIn{get_string(j, "zone", path)};
  } else if (predicate == "is_not_in") {
    c.predicate = IsNotIn{get_string(j, "zone", path)};
  } else if (predicate == "has_state") {
    c.predicate = HasState{get_string(j, "state", path)};
  } else {
    throw ParseError(child(path, "predicate"), "expected is_in, is_not_in or has_state");
  }
  return c;
}

MoveAction parse_action(const Json& j, const std::string& path) {
  MoveAction a;
  a.category = get_string(j, "category", path);
  a.source_zone = get_string(j, "from", path);
  a.destination_zone = get_string(j, "to", path);
  const std::string ppath = child(path, "placement");
  const Json& p = field(j, "placement", path);
  const std::string kind = get_string(p, "kind", ppath);
  if (kind == "grid") {
    a.placement = Grid{static_cast<int>(get_int(p, "columns", ppath)),
                       static_cast<int>(get_int(p, "rows", ppath))};
  } else if (kind == "middle") {
    a.placement = Middle{};
  } else if (kind == "inside") {
    a.placement = InsideObject{get_string(p, "object", ppath)};
  } else {
    throw ParseError(child(ppath, "kind"), "expected grid, middle or inside");
  }
  return a;
}

Zone parse_zone(const Json& j, const std::string& path) {
  Zone z;
  z.id = get_string(j, "id", path);
  z.color = get_string(j, "color", path);
  z.rect = to_rect(field(j, "rect", path), child(path, "rect"));
  if (optional_field(j, "created_at") != nullptr) z.created_at = get_int(j, "created_at", path);
  return z;
}

namespace {

template <typename Fn>
auto parse_list(const Json& j, std::string_view key, const std::string& path, Fn fn) {
  std::vector<decltype(fn(j, path))> out;
  const Json* arr = optional_field(j, key);
  if (arr == nullptr) return out;
  if (!arr->is_array()) throw ParseError(child(path, key), "expected an array");
  for (std::size_t i = 0; i < arr->size(); ++i) {
    out.push_back(fn((*arr)[i], child(child(path, key), i)));
  }
  return out;
}

}  // namespace

Rule parse_rule(const Json& j, const std::string& path) {
  Rule r;
  r.id = get_string(j, "id", path);
  r.conditions = parse_list(j, "conditions", path, parse_condition);
  r.actions = parse_list(j, "actions", path, parse_action);
  r.enabled = get_bool(j, "enabled", path, true);
  if (optional_field(j, "created_at") != nullptr) r.created_at = get_int(j, "created_at", path);
  return r;
}

ManualTrigger parse_button(const Json& j, const std::string& path) {
  ManualTrigger b;
  b.id = get_string(j, "id", path);
  b.label = get_optional_string(j, "label", path).value_or(b.id);
  b.actions = parse_list(j, "actions", path, parse_action);
  b.pending = get_bool(j, "pending", path, false);
  return b;
}

Program Program::from_json(const Json& doc) {
  if (!doc.is_object()) throw ParseError("/", "expected an object");
  Program p;
  for (auto& z : parse_list(doc, "zones", "", parse_zone)) p.restore_zone(std::move(z));
  for (auto& r : parse_list(doc, "rules", "", parse_rule)) p.restore_rule(std::move(r));
  for (auto& b : parse_list(doc, "buttons", "", parse_button)) p.restore_button(std::move(b));
  if (const Json* prefs = optional_field(doc, "preferences")) {
    for (std::size_t i = 0; i < prefs->size(); ++i) {
      const std::string path = child("/preferences", i);
      const Json& cands = field((*prefs)[i], "candidates", path);
      if (!cands.is_array()) throw ParseError(child(path, "candidates"), "expected an array");
      std::vector<std::string> ids;
      for (const auto& c : cands) {
        if (!c.is_string()) throw ParseError(child(path, "candidates"), "expected ids");
        ids.push_back(c.get<std::string>());
      }
      try {
        p.preferences_.remember(ids, get_string((*prefs)[i], "chosen", path));
      } catch (const StateError& e) {
        throw ParseError(path, e.what());
      }
    }
  }
  p.paused_ = get_bool(doc, "paused", "", false);
  if (const Json* next = optional_field(doc, "next_ids")) {
    auto bump = [&](std::string_view key, std::int64_t& counter) {
      if (optional_field(*next, key) != nullptr) {
        counter = std::max(counter, get_int(*next, key, "/next_ids") - 1);
      }
    };
    bump("zone", p.zone_counter_);
    bump("rule", p.rule_counter_);
    bump("button", p.button_counter_);
  }
  return p;
}

// Rendering ---------------------------------------------------------------------------

std::string render_condition(const Condition& c) {
  if (const auto* in = std::get_if<IsIn>(&c.predicate)) {
    return c.category + " is in " + in->zone + " zone";
  }
  if (const auto* out = std::get_if<IsNotIn>(&c.predicate)) {
    return c.category + " is not in " + out->zone + " zone";
  }
  return c.category + " has state " + std::get<HasState>(c.predicate).state;
}

std::string render_action(const MoveAction& a) {
  std::string s = "move " + a.category + " from " + a.source_zone + " zone to " +
                  a.destination_zone + " zone, ";
  if (const auto* grid = std::get_if<Grid>(&a.placement)) {
    s += "in a grid (" + std::to_string(grid->columns) +
         (grid->columns == 1 ? " column, " : " columns, ") + std::to_string(grid->rows) +
         (grid->rows == 1 ? " row)" : " rows)");
  } else if (const auto* inside = std::get_if<InsideObject>(&a.placement)) {
    s += "in a " + inside->container;
  } else {
    s += "in the middle";
  }
  return s;
}

namespace {

std::string join_actions(const std::vector<MoveAction>& actions) {
  std::string s;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (i > 0) s += ", then ";
    s += render_action(actions[i]);
  }
  return s;
}

}  // namespace

std::string render_rule(const Rule& r) {
  std::string s = "When ";
  for (std::size_t i = 0; i < r.conditions.size(); ++i) {
    if (i > 0) s += " and ";
    s += render_condition(r.conditions[i]);
  }
  return s + ", " + join_actions(r.actions);
}

std::string render_button(const ManualTrigger& b) {
  return "On button '" + b.label + "', " + join_actions(b.actions);
}

}  // namespace slp
