#include "slp/commands.hpp"

#include <algorithm>

#include "slp/error.hpp"

namespace slp {

using namespace json_util;

bool ObjectSelector::matches(const WorkspaceObject& obj, const std::vector<Zone>& zones) const {
  if (id && obj.id != *id) return false;
  if (category && obj.category != *category) return false;
  if (state && obj.state != *state) return false;
  if (table && obj.table != *table) return false;
  if (label && obj.label != *label) return false;
  if (contained && obj.contained_in.has_value() != *contained) return false;
  if (zone) {
    auto it = std::find_if(zones.begin(), zones.end(), [&](const Zone& z) { return z.color == *zone; });
    if (it == zones.end() || !in_zone(obj, it->rect)) return false;
  }
  return true;
}

std::optional<ObjectId> select_object(const ObjectSelector& selector, const World& world,
                                      const std::vector<Zone>& zones) {
  for (const auto& obj : world.objects()) {
    if (selector.matches(obj, zones)) return obj.id;
  }
  return std::nullopt;
}

namespace {

ObjectId must_select(const ObjectSelector& selector, const World& world,
                     const std::vector<Zone>& zones) {
  if (auto id = select_object(selector, world, zones)) return *id;
  throw ReferenceError("no object matches " + selector_json(selector).dump());
}

}  // namespace

HumanOp resolve_human_op(const HumanOpRequest& request, const World& world,
                         const std::vector<Zone>& zones) {
  if (const auto* r = std::get_if<RelocateRequest>(&request)) {
    Relocate op;
    op.object = must_select(r->object, world, zones);
    if (const auto* p = std::get_if<Point>(&r->to)) {
      op.destination = *p;
    } else if (const auto* sel = std::get_if<ObjectSelector>(&r->to)) {
      op.destination = must_select(*sel, world, zones);
    } else {
      const auto& color = std::get<std::string>(r->to);
      auto it = std::find_if(zones.begin(), zones.end(), [&](const Zone& z) { return z.color == color; });
      if (it == zones.end()) throw ReferenceError("no " + color + " zone");
      op.destination = it->rect.center();
    }
    return op;
  }
  if (const auto* c = std::get_if<CombineRequest>(&request)) {
    return Combine{must_select(c->part, world, zones), must_select(c->target, world, zones)};
  }
  if (const auto* rm = std::get_if<RemoveRequest>(&request)) {
    return Remove{must_select(rm->object, world, zones)};
  }
  const auto& s = std::get<SpawnRequest>(request);
  return Spawn{s.category, s.position};
}

std::string_view command_kind(const Command& command) { return kCommandKinds[command.index()]; }

ObjectSelector parse_selector(const Json& j, const std::string& path) {
  if (!j.is_object()) throw ParseError(path, "expected an object selector");
  ObjectSelector s;
  if (optional_field(j, "id") != nullptr) s.id = get_int(j, "id", path);
  s.category = get_optional_string(j, "category", path);
  s.state = get_optional_string(j, "state", path);
  s.zone = get_optional_string(j, "zone", path);
  s.table = get_optional_string(j, "table", path);
  s.label = get_optional_string(j, "label", path);
  if (optional_field(j, "contained") != nullptr) s.contained = get_bool(j, "contained", path, false);
  return s;
}

Json selector_json(const ObjectSelector& s) {
  Json j = Json::object();
  if (s.id) j["id"] = *s.id;
  if (s.category) j["category"] = *s.category;
  if (s.state) j["state"] = *s.state;
  if (s.zone) j["zone"] = *s.zone;
  if (s.table) j["table"] = *s.table;
  if (s.label) j["label"] = *s.label;
  if (s.contained) j["contained"] = *s.contained;
  return j;
}

namespace {

template <typename Fn>
auto parse_items(const Json& payload, std::string_view key, Fn fn) {
  const Json& arr = field(payload, key, "");
  if (!arr.is_array()) throw ParseError(child("", key), "expected an array");
  std::vector<decltype(fn(arr, std::string()))> out;
  for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(fn(arr[i], child(child("", key), i)));
  return out;
}

HumanOpRequest parse_human_op(const Json& payload) {
  const std::string op = get_string(payload, "op", "");
  if (op == "relocate") {
    RelocateRequest r;
    r.object = parse_selector(field(payload, "object", ""), "/object");
    if (const Json* to = optional_field(payload, "to")) {
      r.to = to_point(*to, "/to");
    } else if (const Json* into = optional_field(payload, "into")) {
      r.to = parse_selector(*into, "/into");
    } else if (optional_field(payload, "to_zone") != nullptr) {
      r.to = get_string(payload, "to_zone", "");
    } else {
      throw ParseError("/to", "relocate needs 'to', 'into' or 'to_zone'");
    }
    return r;
  }
  if (op == "combine") {
    return CombineRequest{parse_selector(field(payload, "part", ""), "/part"),
                          parse_selector(field(payload, "target", ""), "/target")};
  }
  if (op == "remove") {
    return RemoveRequest{parse_selector(field(payload, "object", ""), "/object")};
  }
  if (op == "spawn") {
    return SpawnRequest{get_string(payload, "category", ""),
                        to_point(field(payload, "position", ""), "/position")};
  }
  throw ParseError("/op", "expected relocate, combine, remove or spawn");
}

}  // namespace

Command parse_command(std::string_view kind, const Json& payload_in) {
  const Json payload = payload_in.is_null() ? Json::object() : payload_in;
  if (!payload.is_object()) throw ParseError("/", "payload must be an object");
  if (kind == "CreateZone") {
    return CreateZoneCmd{get_string(payload, "color", ""), to_rect(field(payload, "rect", ""), "/rect")};
  }
  if (kind == "UpdateZone") {
    return UpdateZoneCmd{get_string(payload, "zone", ""), to_rect(field(payload, "rect", ""), "/rect")};
  }
  if (kind == "DeleteZone") return DeleteZoneCmd{get_string(payload, "zone", "")};
  if (kind == "CreateRule") {
    return CreateRuleCmd{parse_items(payload, "conditions", parse_condition),
                         parse_items(payload, "actions", parse_action)};
  }
  if (kind == "DeleteRule") return DeleteRuleCmd{get_string(payload, "rule", "")};
  if (kind == "CreateButton") {
    return CreateButtonCmd{get_string(payload, "label", ""),
                           parse_items(payload, "actions", parse_action)};
  }
  if (kind == "PressButton") return PressButtonCmd{get_string(payload, "button", "")};
  if (kind == "Pause") return PauseCmd{};
  if (kind == "Resume") return ResumeCmd{};
  if (kind == "ResolveConflict") {
    return ResolveConflictCmd{get_optional_string(payload, "conflict", ""),
                              get_string(payload, "chosen", ""),
                              get_bool(payload, "remember", "", false)};
  }
  if (kind == "HumanOp") return HumanOpCmd{parse_human_op(payload)};
  if (kind == "SaveProgram") return SaveProgramCmd{};
  if (kind == "LoadProgram") return LoadProgramCmd{Program::from_json(field(payload, "program", ""))};
  if (kind == "ResetWorkspace") return ResetWorkspaceCmd{};
  throw ParseError("/kind", "unknown command '" + std::string(kind) + "'");
}

}  // namespace slp
