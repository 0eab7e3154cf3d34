#include <doctest.h>

#include <map>
#include <set>

#include "slp/lint.hpp"
#include "slp/session.hpp"
#include "support.hpp"

using namespace slp;
using namespace slp::test;

namespace {

LintReport lint_fixture(const std::string& name) {
  return lint_program(fixture_program(name), *fixture_scenario(name));
}

Program with_zones(std::initializer_list<std::pair<const char*, Rect>> zones) {
  Program p;
  for (const auto& [color, rect] : zones) p.create_zone(color, rect, 0);
  return p;
}

// Chains seen in a run: after A's action completes, a rule that flags
// without having flagged at A's dispatch, with no human action or command
// in between, was enabled by A.
std::set<std::pair<std::string, std::string>> observed_chains(const ExecutionTrace& trace) {
  std::map<std::int64_t, std::set<std::string>> flagged;
  std::set<std::int64_t> disturbed;
  for (const auto& e : trace.events()) {
    if (e.kind == EventKind::RuleFlagged) flagged[e.tick].insert(e.payload.at("source"));
    if (e.kind == EventKind::HumanActionApplied || e.kind == EventKind::ConflictResolved ||
        e.kind == EventKind::RuleCreated || e.kind == EventKind::ZoneUpdated) {
      disturbed.insert(e.tick);
    }
  }
  std::set<std::pair<std::string, std::string>> out;
  std::optional<std::int64_t> started;
  std::string source;
  for (const auto& e : trace.events()) {
    if (e.kind == EventKind::ActionStarted && e.payload.at("action_index") == 0) {
      started = e.tick;
      source = e.payload.at("source");
    } else if (e.kind == EventKind::ActionAborted) {
      started.reset();
    } else if (e.kind == EventKind::ActionCompleted && started) {
      // Flags at the completion tick exist only once the robot is idle again.
      const auto end = e.tick;
      if (!flagged.count(end)) continue;
      const bool quiet = std::none_of(disturbed.begin(), disturbed.end(), [&](std::int64_t t) {
        return t > *started && t <= end;  // the start tick's own events precede dispatch
      });
      for (const auto& id : flagged[end]) {
        if (quiet && id != source && !flagged[*started].count(id)) out.insert({source, id});
      }
    }
  }
  return out;
}

}  // namespace

TEST_CASE("assembly program: the two rules chain into each other") {
  const auto report = lint_fixture("assembly");
  CHECK(report.has(LintCheck::chain, {"R1", "R2"}));
  CHECK(report.has(LintCheck::chain, {"R2", "R1"}));
  // One needs the holder outside yellow, the other inside it.
  CHECK(report.of(LintCheck::conflict).empty());
  CHECK(report.of(LintCheck::self_retrigger).empty());
  CHECK(report.of(LintCheck::dangling).empty());
}

TEST_CASE("conflict program: the pair is reported and unresolved") {
  const auto report = lint_fixture("conflict");
  REQUIRE(report.of(LintCheck::conflict).size() == 1);
  const auto* f = report.of(LintCheck::conflict).front();
  CHECK(f->items == std::vector<std::string>{"R1", "R2"});
  CHECK_FALSE(f->resolved);
}

TEST_CASE("remembered choices mark conflicts as resolved") {
  const auto report = lint_fixture("sorting");
  const auto conflicts = report.of(LintCheck::conflict);
  CHECK(conflicts.size() == 3);
  for (const auto* f : conflicts) {
    CHECK(f->resolved);
    CHECK(f->message.find("remembered choice") != std::string::npos);
  }
}

TEST_CASE("a rule that keeps its own zone retriggers itself") {
  auto scenario = fixture_scenario("conflict");
  Program p = with_zones({{"green", {0.05, 0.05, 0.45, 0.35}}});
  p.create_rule({is_in("bolt", "green")}, {move("bolt", "green", "green")}, *scenario, 0);
  const auto report = lint_program(p, *scenario);
  CHECK(report.has(LintCheck::self_retrigger, {"R1"}));

  // Moving the bolt elsewhere is fine.
  Program q = with_zones({{"green", {0.05, 0.05, 0.45, 0.35}}, {"yellow", {0.1, 0.7, 0.25, 0.2}}});
  q.create_rule({is_in("bolt", "green")}, {move("bolt", "green", "yellow")}, *scenario, 0);
  CHECK(lint_program(q, *scenario).of(LintCheck::self_retrigger).empty());
}

TEST_CASE("buttons and state changes start chains") {
  auto scenario = fixture_scenario("assembly");
  Program p = with_zones({{"green", {0.05, 0.05, 0.25, 0.4}}, {"red", {0.35, 0.05, 0.2, 0.4}}});
  p.create_button("Fill", {move("top", "red", "green", InsideObject{"holder"})}, *scenario);
  p.create_rule({has_state("holder", "full")}, {move("holder", "green", "red")}, *scenario, 0);
  p.create_rule({is_in("holder", "red")}, {move("holder", "red", "green")}, *scenario, 0);
  const auto report = lint_program(p, *scenario);
  CHECK(report.has(LintCheck::chain, {"B1", "R1"}));
  CHECK(report.has(LintCheck::chain, {"R1", "R2"}));
  CHECK(report.has(LintCheck::chain, {"R2", "R1"}) == false);  // a move does not change state
  CHECK_FALSE(report.has(LintCheck::chain, {"B1", "R2"}));
}

TEST_CASE("nested zones make presence and absence contradict") {
  auto scenario = fixture_scenario("conflict");
  Program p = with_zones({{"green", {0.05, 0.05, 0.45, 0.35}}, {"blue", {0.1, 0.1, 0.1, 0.1}},
                          {"yellow", {0.1, 0.7, 0.25, 0.2}}});
  p.create_rule({is_in("bolt", "blue")}, {move("bolt", "blue", "yellow")}, *scenario, 0);
  p.create_rule({is_not_in("bolt", "green")}, {move("bolt", "yellow", "green")}, *scenario, 0);
  CHECK(lint_program(p, *scenario).of(LintCheck::conflict).empty());
}

TEST_CASE("dangling references") {
  auto scenario = fixture_scenario("conflict");
  Program p = Program::from_json(json_util::parse_document(R"({
    "zones": [{"id": "Z1", "color": "green", "rect": [0.05, 0.05, 0.45, 0.35]}],
    "rules": [{"id": "R1", "conditions": [{"category": "bolt", "predicate": "is_in", "zone": "green"}],
               "actions": [{"category": "bolt", "from": "green", "to": "pink", "placement": {"kind": "middle"}}]}]
  })"));
  const auto report = lint_program(p, *scenario);
  REQUIRE(report.of(LintCheck::dangling).size() == 1);
  CHECK(report.of(LintCheck::dangling).front()->message.find("pink") != std::string::npos);
}

TEST_CASE("text and JSON output") {
  const auto report = lint_fixture("conflict");
  const std::string text = lint_text(report);
  CHECK(text.find("conflict: R1 and R2 can be triggered together\n") != std::string::npos);
  REQUIRE(report.findings.size() == 1);
  CHECK(text.substr(text.rfind('\n', text.size() - 2) + 1) == "1 finding\n");
  CHECK(lint_text(lint_fixture("assembly")).ends_with("\n2 findings\n"));
  const Json j = lint_json(report);
  CHECK(j.at("counts").at("conflict") == 1);
  CHECK(j.at("counts").at("dangling") == 0);
  CHECK(j.at("findings").size() == report.findings.size());
  CHECK(lint_text(LintReport{}) == "0 findings\n");
}

TEST_CASE("every chain observed in a fixture run is predicted") {
  for (const char* name : {"sorting", "kitting", "assembly", "conflict"}) {
    CAPTURE(name);
    const auto report = lint_fixture(name);
    const auto run = run_headless(fixture_scenario(name), fixture_program(name),
                                  fixture_script(name), {});
    for (const auto& [from, to] : observed_chains(run.trace)) {
      CAPTURE(from);
      CAPTURE(to);
      CHECK(report.has(LintCheck::chain, {from, to}));
    }
  }
  // The assembly run does show the holder hand-back.
  const auto run = run_headless(fixture_scenario("assembly"), fixture_program("assembly"),
                                fixture_script("assembly"), {});
  CHECK(observed_chains(run.trace).count({"R2", "R1"}) == 1);
}
