#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "slp/json_util.hpp"
#include "slp/program.hpp"
#include "slp/world.hpp"

namespace slp {

/// Picks objects by attributes; the lowest matching id wins.
struct ObjectSelector {
  std::optional<ObjectId> id;
  std::optional<std::string> category;
  std::optional<std::string> state;
  /// Zone color.
  std::optional<std::string> zone;
  std::optional<std::string> table;
  std::optional<std::string> label;
  /// true: inside something; false: top-level only.
  std::optional<bool> contained;

  bool matches(const WorkspaceObject& obj, const std::vector<Zone>& zones) const;
  friend bool operator==(const ObjectSelector&, const ObjectSelector&) = default;
};

std::optional<ObjectId> select_object(const ObjectSelector& selector, const World& world,
                                      const std::vector<Zone>& zones);

struct RelocateRequest {
  ObjectSelector object;
  /// Table position, container selector, or zone color (its center).
  std::variant<Point, ObjectSelector, std::string> to;
};
struct CombineRequest {
  ObjectSelector part;
  ObjectSelector target;
};
struct RemoveRequest {
  ObjectSelector object;
};
struct SpawnRequest {
  std::string category;
  Point position;
};
using HumanOpRequest = std::variant<RelocateRequest, CombineRequest, RemoveRequest, SpawnRequest>;

/// Resolves selectors against the current world. Throws ReferenceError when
/// nothing matches.
HumanOp resolve_human_op(const HumanOpRequest& request, const World& world,
                         const std::vector<Zone>& zones);

// Commands applied by the tick loop -----------------------------------------------

struct CreateZoneCmd {
  std::string color;
  Rect rect;
};
/// `zone` is a zone id or a zone color.
struct UpdateZoneCmd {
  std::string zone;
  Rect rect;
};
struct DeleteZoneCmd {
  std::string zone;
};
struct CreateRuleCmd {
  std::vector<Condition> conditions;
  std::vector<MoveAction> actions;
};
struct DeleteRuleCmd {
  std::string rule;
};
struct CreateButtonCmd {
  std::string label;
  std::vector<MoveAction> actions;
};
/// `button` is a button id or label.
struct PressButtonCmd {
  std::string button;
};
struct PauseCmd {};
struct ResumeCmd {};
struct ResolveConflictCmd {
  /// Unset: whichever conflict is open.
  std::optional<std::string> conflict;
  std::string chosen;
  bool remember = false;
};
struct HumanOpCmd {
  HumanOpRequest op;
};
struct SaveProgramCmd {};
struct LoadProgramCmd {
  Program program;
};
struct ResetWorkspaceCmd {};

using Command =
    std::variant<CreateZoneCmd, UpdateZoneCmd, DeleteZoneCmd, CreateRuleCmd, DeleteRuleCmd,
                 CreateButtonCmd, PressButtonCmd, PauseCmd, ResumeCmd, ResolveConflictCmd,
                 HumanOpCmd, SaveProgramCmd, LoadProgramCmd, ResetWorkspaceCmd>;

/// Wire names, in the order of the Command alternatives.
inline constexpr std::array<std::string_view, 14> kCommandKinds = {
    "CreateZone",  "UpdateZone", "DeleteZone",      "CreateRule",  "DeleteRule",
    "CreateButton", "PressButton", "Pause",          "Resume",      "ResolveConflict",
    "HumanOp",     "SaveProgram", "LoadProgram",    "ResetWorkspace"};

std::string_view command_kind(const Command& command);

/// Parses the payload of a command by wire name. Throws ParseError.
Command parse_command(std::string_view kind, const Json& payload);

ObjectSelector parse_selector(const Json& j, const std::string& path);
Json selector_json(const ObjectSelector& s);

}  // namespace slp
