#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "slp/json_util.hpp"
#include "slp/scenario.hpp"
#include "slp/world.hpp"

namespace slp {

/// Accessible palette zones are labelled from.
inline constexpr std::array<std::string_view, 8> kZonePalette = {
    "green", "yellow", "blue", "red", "orange", "purple", "pink", "cyan"};

bool in_palette(std::string_view color);

// Conditions -----------------------------------------------------------------

struct IsIn {
  std::string zone;
  friend bool operator==(const IsIn&, const IsIn&) = default;
};
/// Boolean absence: no object of the category is in the zone. Contributes
/// nothing to action filtering.
struct IsNotIn {
  std::string zone;
  friend bool operator==(const IsNotIn&, const IsNotIn&) = default;
};
struct HasState {
  std::string state;
  friend bool operator==(const HasState&, const HasState&) = default;
};
using Predicate = std::variant<IsIn, IsNotIn, HasState>;

struct Condition {
  std::string category;
  Predicate predicate;
  friend bool operator==(const Condition&, const Condition&) = default;
};

// Actions --------------------------------------------------------------------

struct Grid {
  int columns = 1;
  int rows = 1;
  friend bool operator==(const Grid&, const Grid&) = default;
};
struct Middle {
  friend bool operator==(const Middle&, const Middle&) = default;
};
struct InsideObject {
  std::string container;
  friend bool operator==(const InsideObject&, const InsideObject&) = default;
};
using Placement = std::variant<Grid, Middle, InsideObject>;

struct MoveAction {
  std::string category;
  std::string source_zone;
  std::string destination_zone;
  Placement placement = Middle{};
  friend bool operator==(const MoveAction&, const MoveAction&) = default;
};

// Program items --------------------------------------------------------------

struct Rule {
  std::string id;
  std::vector<Condition> conditions;
  std::vector<MoveAction> actions;
  bool enabled = true;
  std::int64_t created_at = 0;
  friend bool operator==(const Rule&, const Rule&) = default;
};

struct ManualTrigger {
  std::string id;
  std::string label;
  std::vector<MoveAction> actions;
  bool pending = false;
  friend bool operator==(const ManualTrigger&, const ManualTrigger&) = default;
};

/// Remembered conflict answers, keyed by the exact set of candidate ids.
class PreferenceStore {
 public:
  using Key = std::vector<std::string>;  // sorted, unique

  static Key make_key(std::vector<std::string> ids);

  /// Throws StateError when `chosen` is not in `candidates`.
  void remember(const std::vector<std::string>& candidates, const std::string& chosen);
  std::optional<std::string> lookup(const std::vector<std::string>& candidates) const;
  void forget_id(std::string_view id);

  const std::map<Key, std::string>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  friend bool operator==(const PreferenceStore&, const PreferenceStore&) = default;

 private:
  std::map<Key, std::string> entries_;
};

/// The live program: zones, rules, buttons and remembered preferences.
class Program {
 public:
  const std::vector<Zone>& zones() const { return zones_; }
  const std::vector<Rule>& rules() const { return rules_; }
  const std::vector<ManualTrigger>& buttons() const { return buttons_; }
  const PreferenceStore& preferences() const { return preferences_; }
  PreferenceStore& preferences() { return preferences_; }
  bool paused() const { return paused_; }
  void set_paused(bool paused) { paused_ = paused; }

  const Zone* find_zone(std::string_view id) const;
  const Zone* zone_by_color(std::string_view color) const;
  const Rule* find_rule(std::string_view id) const;
  const ManualTrigger* find_button(std::string_view id) const;

  /// Throws ValidationError on an unknown palette color or duplicate color.
  const Zone& create_zone(std::string_view color, const Rect& rect, std::int64_t tick);
  /// Moves/resizes a zone. Throws ReferenceError for unknown ids.
  const Zone& update_zone(std::string_view id, const Rect& rect);
  /// Removes the zone and disables every enabled rule that refers to it.
  /// Returns the ids of the rules that were disabled.
  std::vector<std::string> delete_zone(std::string_view id);

  /// Validates every reference and appends an enabled rule. Throws
  /// ValidationError listing all problems.
  const Rule& create_rule(std::vector<Condition> conditions, std::vector<MoveAction> actions,
                          const Scenario& scenario, std::int64_t tick);
  void delete_rule(std::string_view id);

  const ManualTrigger& create_button(std::string label, std::vector<MoveAction> actions,
                                     const Scenario& scenario);
  void press_button(std::string_view id);
  void consume_button(std::string_view id);

  /// Problems with the program as a whole (dangling zones, unknown names).
  std::vector<std::string> validate(const Scenario& scenario) const;

  /// Canonical document: arrays keep creation order, object keys sorted.
  Json to_json() const;
  /// Structural parse only; call validate() for references.
  static Program from_json(const Json& doc);

  /// Inserts items verbatim (ids included); used when loading documents
  /// and when rebuilding a program from its event stream.
  void restore_zone(Zone zone);
  void restore_rule(Rule rule);
  void restore_button(ManualTrigger button);
  void set_rule_enabled(std::string_view id, bool enabled);

  friend bool operator==(const Program&, const Program&) = default;

 private:
  Rule& mut_rule(std::string_view id);
  ManualTrigger& mut_button(std::string_view id);

  std::vector<Zone> zones_;
  std::vector<Rule> rules_;
  std::vector<ManualTrigger> buttons_;
  PreferenceStore preferences_;
  bool paused_ = false;
  std::int64_t zone_counter_ = 0;
  std::int64_t rule_counter_ = 0;
  std::int64_t button_counter_ = 0;
};

/// Reference problems in a condition list / action list. Zone refs are
/// checked against `zones` when given.
std::vector<std::string> check_conditions(const std::vector<Condition>& conditions,
                                          const Scenario& scenario,
                                          const std::vector<Zone>* zones);
std::vector<std::string> check_actions(const std::vector<MoveAction>& actions,
                                       const Scenario& scenario, const std::vector<Zone>* zones);

Json condition_json(const Condition& c);
Json action_json(const MoveAction& a);
Json rule_json(const Rule& r);
Json button_json(const ManualTrigger& b);
Json zone_json(const Zone& z);
Condition parse_condition(const Json& j, const std::string& path);
MoveAction parse_action(const Json& j, const std::string& path);
Zone parse_zone(const Json& j, const std::string& path);
Rule parse_rule(const Json& j, const std::string& path);
ManualTrigger parse_button(const Json& j, const std::string& path);

/// Human-readable renderings used in prompts and summaries, e.g.
/// "When bolt is in green zone, move bolt from green zone to yellow zone, in a box".
std::string render_condition(const Condition& c);
std::string render_action(const MoveAction& a);
std::string render_rule(const Rule& r);
std::string render_button(const ManualTrigger& b);

}  // namespace slp
