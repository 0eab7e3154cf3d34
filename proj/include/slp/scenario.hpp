#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "slp/geometry.hpp"
#include "slp/json_util.hpp"

namespace slp {

/// A named area marked on a table (taped exchange area, pallet grid, ...).
/// Areas carry no semantics for the engine; they document the layout that
/// program zones are drawn over.
struct TableArea {
  std::string name;
  Rect rect;
};

struct TableRegion {
  std::string name;
  Rect rect;
  std::vector<TableArea> areas;
};

struct CategorySpec {
  std::string name;
  bool detectable = true;
  bool is_container = false;
  std::vector<std::string> states;
  std::optional<std::string> default_state;

  bool has_state(std::string_view state) const;
};

struct ObjectPlacement {
  std::string category;
  Point position;
  std::optional<std::string> state;
  /// Human-readable label (e.g. the name written on a box). Not perceived.
  std::optional<std::string> label;
};

enum class PartFate { absorbed, attached };

/// Placing a part into a target in `required_target_state` moves the
/// target to `resulting_target_state`.
struct CombinationRule {
  std::string part_category;
  std::string target_category;
  std::string required_target_state;
  std::string resulting_target_state;
  PartFate part_fate = PartFate::attached;
};

struct PerceptionConfig {
  /// Mirrors CategorySpec::detectable.
  std::map<std::string, bool, std::less<>> detectable;
  std::chrono::milliseconds publish_period{500};
  /// Camera field of view; objects outside are not perceived. Unset means
  /// the whole workspace is visible.
  std::optional<Rect> field_of_view;
  /// Half-width of uniform positional jitter, meters. Zero by default.
  double position_noise = 0.0;

  bool is_detectable(std::string_view category) const;
};

struct Scenario {
  std::string name;
  std::vector<TableRegion> tables;
  std::vector<CategorySpec> categories;
  std::vector<ObjectPlacement> initial_objects;
  std::vector<CombinationRule> combinations;
  PerceptionConfig perception;
  Point robot_home{0.0, 0.0};

  const CategorySpec* find_category(std::string_view name) const;
  /// Throws ReferenceError for unknown names.
  const CategorySpec& category(std::string_view name) const;
  const TableRegion* table_at(Point p) const;
  const TableArea* find_area(std::string_view name) const;
  /// Rule matching (part, target, current target state), if any.
  const CombinationRule* find_combination(std::string_view part, std::string_view target,
                                          std::string_view target_state) const;
  /// True when some rule pairs these categories regardless of state.
  bool pairs_combine(std::string_view part, std::string_view target) const;
};

/// Parses and validates a scenario document (JSON).
/// Throws ParseError for malformed input and ReferenceError for names that
/// do not resolve.
Scenario load_scenario(std::string_view document);
Scenario load_scenario_file(const std::string& path);

}  // namespace slp
