#include "slp/lint.hpp"

#include <algorithm>
#include <sstream>

namespace slp {

std::string_view to_string(LintCheck check) {
  switch (check) {
    case LintCheck::chain: return "chain";
    case LintCheck::conflict: return "conflict";
    case LintCheck::self_retrigger: return "self-retrigger";
    case LintCheck::dangling: return "dangling";
  }
  return "?";
}

std::vector<const LintFinding*> LintReport::of(LintCheck check) const {
  std::vector<const LintFinding*> out;
  for (const auto& f : findings) {
    if (f.check == check) out.push_back(&f);
  }
  return out;
}

bool LintReport::has(LintCheck check, const std::vector<std::string>& items) const {
  return std::any_of(findings.begin(), findings.end(), [&](const LintFinding& f) {
    return f.check == check && f.items == items;
  });
}

namespace {

/// Where a move can leave the object: the exact points for middle and grid
/// placements, the whole destination zone for a container somewhere in it.
struct Landing {
  std::vector<Point> points;
  std::optional<Rect> area;

  bool can_touch(const Rect& zone) const {
    if (area) return area->intersects(zone);
    return std::any_of(points.begin(), points.end(), [&](Point p) { return zone.contains(p); });
  }
  bool always_inside(const Rect& zone) const {
    if (area) return zone.covers(*area);
    return std::all_of(points.begin(), points.end(), [&](Point p) { return zone.contains(p); });
  }
};

class Analyzer {
 public:
  Analyzer(const Program& program, const Scenario& scenario)
      : program_(program), scenario_(scenario) {}

  std::optional<Rect> zone(std::string_view color) const {
    if (const Zone* z = program_.zone_by_color(color)) return z->rect;
    return std::nullopt;
  }

  std::optional<Landing> landing(const MoveAction& a) const {
    auto dst = zone(a.destination_zone);
    if (!dst) return std::nullopt;
    Landing l;
    if (std::holds_alternative<Middle>(a.placement)) {
      l.points.push_back(dst->center());
    } else if (const auto* g = std::get_if<Grid>(&a.placement)) {
      if (g->columns < 1 || g->rows < 1) return std::nullopt;
      l.points = grid_cells(*dst, g->columns, g->rows);
    } else {
      l.area = *dst;
    }
    return l;
  }

  /// Why `a` can make `c` true, or empty.
  std::string enables(const MoveAction& a, const Condition& c) const {
    if (const auto* in = std::get_if<IsIn>(&c.predicate)) {
      if (c.category != a.category) return {};
      auto z = zone(in->zone);
      auto l = landing(a);
      if (z && l && l->can_touch(*z)) {
        return "moves " + a.category + " into the " + in->zone + " zone";
      }
    } else if (const auto* out = std::get_if<IsNotIn>(&c.predicate)) {
      if (c.category != a.category) return {};
      auto z = zone(out->zone);
      auto src = zone(a.source_zone);
      auto l = landing(a);
      if (z && src && l && src->intersects(*z) && !l->always_inside(*z)) {
        return "takes " + a.category + " out of the " + out->zone + " zone";
      }
    } else if (const auto* has = std::get_if<HasState>(&c.predicate)) {
      const auto* inside = std::get_if<InsideObject>(&a.placement);
      if (inside == nullptr || inside->container != c.category) return {};
      for (const auto& rule : scenario_.combinations) {
        if (rule.part_category == a.category && rule.target_category == c.category &&
            rule.resulting_target_state == has->state) {
          return "puts " + a.category + " into " + c.category + ", making it " + has->state;
        }
      }
    }
    return {};
  }

  /// Whether `a` can make `c` false.
  bool falsifies(const MoveAction& a, const Condition& c) const {
    if (const auto* in = std::get_if<IsIn>(&c.predicate)) {
      if (c.category != a.category) return false;
      auto z = zone(in->zone);
      auto src = zone(a.source_zone);
      auto l = landing(a);
      return z && src && l && src->intersects(*z) && !l->always_inside(*z);
    }
    if (const auto* out = std::get_if<IsNotIn>(&c.predicate)) {
      if (c.category != a.category) return false;
      auto z = zone(out->zone);
      auto l = landing(a);
      return z && l && l->can_touch(*z);
    }
    const auto& has = std::get<HasState>(c.predicate);
    const auto* inside = std::get_if<InsideObject>(&a.placement);
    if (inside == nullptr || inside->container != c.category) return false;
    return std::any_of(scenario_.combinations.begin(), scenario_.combinations.end(),
                       [&](const CombinationRule& r) {
                         return r.part_category == a.category &&
                                r.target_category == c.category &&
                                r.required_target_state == has.state &&
                                r.resulting_target_state != has.state;
                       });
  }

  /// IsIn(C, Z) against IsNotIn(C, Z') with Z inside Z'.
  bool contradict(const Condition& a, const Condition& b) const {
    if (a.category != b.category) return false;
    const auto* in = std::get_if<IsIn>(&a.predicate);
    const auto* out = std::get_if<IsNotIn>(&b.predicate);
    if (in == nullptr || out == nullptr) return false;
    if (in->zone == out->zone) return true;
    auto zi = zone(in->zone);
    auto zo = zone(out->zone);
    return zi && zo && zo->covers(*zi);
  }

  bool jointly_unsatisfiable(const Rule& a, const Rule& b) const {
    for (const auto& ca : a.conditions) {
      for (const auto& cb : b.conditions) {
        if (contradict(ca, cb) || contradict(cb, ca)) return true;
      }
    }
    return false;
  }

 private:
  const Program& program_;
  const Scenario& scenario_;
};

}  // namespace

LintReport lint_program(const Program& program, const Scenario& scenario) {
  LintReport report;
  const Analyzer an(program, scenario);

  for (auto& issue : program.validate(scenario)) {
    report.findings.push_back({LintCheck::dangling, {}, std::move(issue), false});
  }

  std::vector<const Rule*> rules;
  for (const auto& r : program.rules()) {
    if (r.enabled) rules.push_back(&r);
  }

  // Chains. Buttons count as sources: pressing one can start a chain.
  struct Source {
    std::string id;
    const std::vector<MoveAction>* actions;
  };
  std::vector<Source> sources;
  for (const Rule* r : rules) sources.push_back({r->id, &r->actions});
  for (const auto& b : program.buttons()) sources.push_back({b.id, &b.actions});
  for (const auto& src : sources) {
    for (const Rule* dst : rules) {
      if (dst->id == src.id) continue;
      std::string why;
      for (const auto& a : *src.actions) {
        for (const auto& c : dst->conditions) {
          if (why.empty()) why = an.enables(a, c);
        }
      }
      if (!why.empty()) {
        report.findings.push_back({LintCheck::chain,
                                   {src.id, dst->id},
                                   src.id + " can trigger " + dst->id + ": it " + why,
                                   false});
      }
    }
  }

  // Conflicts.
  for (std::size_t i = 0; i < rules.size(); ++i) {
    for (std::size_t j = i + 1; j < rules.size(); ++j) {
      if (an.jointly_unsatisfiable(*rules[i], *rules[j])) continue;
      std::vector<std::string> pair{rules[i]->id, rules[j]->id};
      LintFinding f{LintCheck::conflict, pair,
                    rules[i]->id + " and " + rules[j]->id + " can be triggered together", false};
      if (auto chosen = program.preferences().lookup(pair)) {
        f.resolved = true;
        f.message += " (remembered choice: " + *chosen + ")";
      }
      report.findings.push_back(std::move(f));
    }
  }

  // Self-retrigger.
  for (const Rule* r : rules) {
    const bool can_stop = std::any_of(r->conditions.begin(), r->conditions.end(),
                                      [&](const Condition& c) {
                                        return std::any_of(r->actions.begin(), r->actions.end(),
                                                           [&](const MoveAction& a) {
                                                             return an.falsifies(a, c);
                                                           });
                                      });
    if (!can_stop) {
      report.findings.push_back(
          {LintCheck::self_retrigger,
           {r->id},
           r->id + " cannot make its own conditions false; it repeats while objects remain",
           false});
    }
  }
  return report;
}

std::string lint_text(const LintReport& report) {
  std::ostringstream out;
  for (const auto& f : report.findings) {
    out << to_string(f.check) << ": " << f.message << '\n';
  }
  out << report.findings.size() << (report.findings.size() == 1 ? " finding" : " findings")
      << '\n';
  return out.str();
}

Json lint_json(const LintReport& report) {
  Json findings = Json::array();
  Json counts = Json::object();
  for (auto c : {LintCheck::chain, LintCheck::conflict, LintCheck::self_retrigger,
                 LintCheck::dangling}) {
    counts[std::string(to_string(c))] = 0;
  }
  for (const auto& f : report.findings) {
    Json j = {{"check", to_string(f.check)}, {"items", f.items}, {"message", f.message}};
    if (f.check == LintCheck::conflict) j["resolved"] = f.resolved;
    findings.push_back(std::move(j));
    counts[std::string(to_string(f.check))] = counts[std::string(to_string(f.check))].get<int>() + 1;
  }
  return {{"findings", findings}, {"counts", counts}};
}

}  // namespace slp
