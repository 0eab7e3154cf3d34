#include <doctest.h>

#include <thread>

#include "slp/error.hpp"
#include "slp/session.hpp"
#include "support.hpp"

using namespace slp;
using namespace slp::test;
using namespace std::chrono_literals;

namespace {

RunResult run_fixture(const std::string& name, SessionConfig config = {}) {
  return run_headless(fixture_scenario(name), fixture_program(name), fixture_script(name), config);
}

bool has(std::span<const TraceEvent> events, EventKind kind) {
  return std::any_of(events.begin(), events.end(), [&](const TraceEvent& e) { return e.kind == kind; });
}

const TraceEvent* first(std::span<const TraceEvent> events, EventKind kind) {
  for (const auto& e : events) {
    if (e.kind == kind) return &e;
  }
  return nullptr;
}

template <typename Pred>
void tick_until(Session& s, Pred pred, int limit = 400) {
  for (int i = 0; i < limit; ++i) {
    if (pred(s.tick())) return;
  }
  FAIL("condition not reached within " << limit << " ticks");
}

auto until_kind(EventKind kind) {
  return [kind](std::span<const TraceEvent> events) { return has(events, kind); };
}

Program zones_only(const std::string& fixture) {
  const Program full = fixture_program(fixture);
  Program p;
  for (const auto& z : full.zones()) p.restore_zone(z);
  return p;
}

Command rule_cmd(std::vector<Condition> conds, std::vector<MoveAction> actions) {
  return CreateRuleCmd{std::move(conds), std::move(actions)};
}

}  // namespace

TEST_CASE("every fixture reaches quiescence") {
  for (const char* name : {"sorting", "kitting", "assembly", "conflict"}) {
    CAPTURE(name);
    const auto r = run_fixture(name);
    CHECK_FALSE(r.timed_out);
    CHECK(r.trace.count(EventKind::ActionAborted) == 0);
    CHECK(r.trace.count(EventKind::Error) == 0);
    CHECK(r.trace.count(EventKind::ActionCompleted) > 0);
    CHECK(r.world.containment_consistent());
    CHECK(gating_violations(r.trace.events()).empty());
    // The trace alone rebuilds the final program.
    CHECK(rebuild_program(r.trace.events()) == r.program);
    CHECK(r.trace.events().front().kind == EventKind::ProgramLoaded);
  }
}

TEST_CASE("runs are deterministic") {
  for (const char* name : {"sorting", "assembly"}) {
    CAPTURE(name);
    const auto a = run_fixture(name);
    const auto b = run_fixture(name);
    CHECK(a.trace == b.trace);
    CHECK(trace_digest(a.trace) == trace_digest(b.trace));
  }
}

TEST_CASE("one snapshot per tick") {
  const auto r = run_fixture("sorting");
  CHECK(r.trace.count(EventKind::SnapshotPublished) == static_cast<std::size_t>(r.ticks));
}

TEST_CASE("tick budget") {
  SessionConfig config;
  config.max_ticks = 5;
  const auto r = run_fixture("sorting", config);
  CHECK(r.timed_out);
  CHECK(r.ticks == 5);
  REQUIRE_FALSE(r.trace.empty());
  CHECK(r.trace.events().back().kind == EventKind::Timeout);
  CHECK(r.trace.events().back().payload.at("max_ticks") == 5);

  config.max_ticks = 0;
  CHECK_THROWS_AS(run_fixture("sorting", config), ValidationError);
  config.max_ticks = 10;
  config.tick_period = 0ms;
  CHECK_THROWS_AS(run_fixture("sorting", config), ValidationError);
}

TEST_CASE("rules created while paused wait for resume") {
  Session s(fixture_scenario("sorting"), zones_only("sorting"));
  s.submit(PauseCmd{});
  CHECK(has(s.tick(), EventKind::Paused));
  s.submit(rule_cmd({is_in("bolt", "green")}, {move("bolt", "green", "yellow", InsideObject{"box"})}));
  s.submit(rule_cmd({is_in("connector", "green")}, {move("connector", "green", "blue", InsideObject{"box"})}));
  s.submit(rule_cmd({is_in("fastener", "green")}, {move("fastener", "green", "red", InsideObject{"box"})}));
  for (int i = 0; i < 5; ++i) {
    const auto events = s.tick();
    CHECK_FALSE(has(events, EventKind::RuleFlagged));
    CHECK_FALSE(has(events, EventKind::ActionStarted));
  }
  CHECK(s.program().rules().size() == 3);
  s.submit(PauseCmd{});  // already paused: nothing happens
  CHECK_FALSE(has(s.tick(), EventKind::Paused));
  s.submit(ResumeCmd{});
  const auto events = s.tick();
  CHECK(has(events, EventKind::Resumed));
  const auto* raised = first(events, EventKind::ConflictRaised);
  REQUIRE(raised);
  CHECK(raised->payload.at("candidates") == Json({"R1", "R2", "R3"}));
}

TEST_CASE("pause stops the robot at the next primitive boundary") {
  Session s(fixture_scenario("conflict"), zones_only("conflict"));
  s.submit(rule_cmd({is_in("bolt", "green")}, {move("bolt", "green", "blue")}));
  tick_until(s, [](auto events) {
    const auto* e = first(events, EventKind::PrimitiveStarted);
    return e && e->payload.at("index") == 4;
  });
  s.submit(PauseCmd{});
  s.tick();
  const auto held = s.executor().primitive_index();
  for (int i = 0; i < 5; ++i) {
    const auto events = s.tick();
    CHECK_FALSE(has(events, EventKind::PrimitiveStarted));
    CHECK_FALSE(has(events, EventKind::PrimitiveCompleted));
  }
  CHECK(s.executor().waiting_at_boundary());
  CHECK(s.executor().primitive_index() == held);
  s.submit(ResumeCmd{});
  tick_until(s, until_kind(EventKind::ActionCompleted));
}

TEST_CASE("reset aborts the running action and restores the objects") {
  Session s(fixture_scenario("sorting"), fixture_program("sorting"));
  tick_until(s, [](auto events) {
    const auto* e = first(events, EventKind::PrimitiveCompleted);
    return e && e->payload.at("index") == 3;  // object in the gripper
  });
  REQUIRE(s.executor().held_object());
  s.submit(ResetWorkspaceCmd{});
  const auto events = s.tick();
  CHECK(has(events, EventKind::ActionAborted));
  const auto* reset = first(events, EventKind::WorkspaceReset);
  REQUIRE(reset);
  CHECK(reset->payload.at("objects").size() == 12);
  CHECK(s.world().objects().size() == 12);
  for (const auto& o : s.world().objects()) CHECK_FALSE(o.held);
  CHECK(s.world().objects().front().id == 13);
}

TEST_CASE("a pending button with nothing to move warns once") {
  SessionConfig config;
  config.button_warning_ticks = 4;
  Session s(fixture_scenario("conflict"), zones_only("conflict"), config);
  s.submit(CreateButtonCmd{"Clear blue", {move("bolt", "blue", "yellow")}});
  s.submit(PressButtonCmd{"Clear blue"});
  int warnings = 0;
  for (int i = 0; i < 20; ++i) {
    for (const auto& e : s.tick()) {
      if (e.kind == EventKind::Warning && e.payload.at("code") == "button-unbound") {
        ++warnings;
        CHECK(e.payload.at("button") == "B1");
        CHECK(e.tick == 3);
      }
    }
  }
  CHECK(warnings == 1);
  CHECK(s.program().find_button("B1")->pending);
}

TEST_CASE("a pressed button runs once and is consumed") {
  Session s(fixture_scenario("conflict"), zones_only("conflict"));
  s.submit(CreateButtonCmd{"Go", {move("bolt", "green", "yellow")}});
  s.submit(PressButtonCmd{"B1"});
  const auto events = s.tick();
  CHECK(has(events, EventKind::ButtonConsumed));
  const auto* started = first(events, EventKind::ActionStarted);
  REQUIRE(started);
  CHECK(started->payload.at("source") == "B1");
  CHECK_FALSE(s.program().find_button("B1")->pending);
  tick_until(s, until_kind(EventKind::ActionCompleted));
  for (int i = 0; i < 5; ++i) CHECK_FALSE(has(s.tick(), EventKind::ActionStarted));
  CHECK(s.quiescent());
  CHECK(rebuild_program(s.trace().events()) == s.program());
}

TEST_CASE("deleting the running rule lets its action finish") {
  Session s(fixture_scenario("conflict"), zones_only("conflict"));
  s.submit(rule_cmd({is_in("bolt", "green")}, {move("bolt", "green", "yellow")}));
  tick_until(s, until_kind(EventKind::ActionStarted));
  s.submit(DeleteRuleCmd{"R1"});
  const auto events = s.tick();
  const auto* deleted = first(events, EventKind::RuleDeleted);
  REQUIRE(deleted);
  CHECK(deleted->payload.at("running") == true);
  CHECK(s.executor().running_source() == "R1");
  tick_until(s, until_kind(EventKind::ActionCompleted));
  for (int i = 0; i < 5; ++i) CHECK_FALSE(has(s.tick(), EventKind::ActionStarted));

  // Recreating the rule gives it a fresh id.
  s.submit(rule_cmd({is_in("bolt", "green")}, {move("bolt", "green", "yellow")}));
  const auto again = s.tick();
  const auto* created = first(again, EventKind::RuleCreated);
  REQUIRE(created);
  CHECK(created->payload.at("rule").at("id") == "R2");
  CHECK(has(again, EventKind::ActionStarted));
  CHECK(rebuild_program(s.trace().events()) == s.program());
}

TEST_CASE("deleting a conflict candidate cancels the prompt") {
  Session s(fixture_scenario("conflict"), fixture_program("conflict"));
  tick_until(s, until_kind(EventKind::ConflictRaised));
  s.submit(DeleteRuleCmd{"R2"});
  const auto events = s.tick();
  CHECK(has(events, EventKind::ConflictCancelled));
  const auto* started = first(events, EventKind::ActionStarted);
  REQUIRE(started);
  CHECK(started->payload.at("source") == "R1");
}

TEST_CASE("the human cannot touch the object in the gripper") {
  Session s(fixture_scenario("conflict"), zones_only("conflict"));
  s.submit(rule_cmd({is_in("bolt", "green")}, {move("bolt", "green", "yellow")}));
  tick_until(s, [&](auto) { return s.executor().held_object().has_value(); });
  const ObjectId held = *s.executor().held_object();
  s.submit(HumanOpCmd{RelocateRequest{{.id = held}, Point{0.3, 0.3}}}, "h1");
  const auto* error = first(s.tick(), EventKind::Error);
  REQUIRE(error);
  CHECK(error->payload.at("command") == "HumanOp");
  CHECK(error->payload.at("request_id") == "h1");
  // Other objects are fair game.
  s.submit(HumanOpCmd{RelocateRequest{{.id = held + 1}, Point{0.3, 0.3}}});
  CHECK(has(s.tick(), EventKind::HumanActionApplied));
}

TEST_CASE("rejected commands become error events") {
  Session s(fixture_scenario("sorting"), fixture_program("sorting"));
  s.submit(CreateZoneCmd{"magenta", {0, 0, 0.1, 0.1}}, "q1");
  s.submit(ResolveConflictCmd{std::nullopt, "R1", false}, "q2");
  s.submit(DeleteRuleCmd{"R9"}, "q3");
  std::vector<const TraceEvent*> errors;
  const auto events = s.tick();
  for (const auto& e : events) {
    if (e.kind == EventKind::Error) errors.push_back(&e);
  }
  REQUIRE(errors.size() == 3);
  CHECK(errors[0]->payload.at("request_id") == "q1");
  CHECK(errors[0]->payload.at("command") == "CreateZone");
  CHECK_FALSE(errors[0]->payload.at("issues").empty());
  CHECK(errors[1]->payload.at("command") == "ResolveConflict");
  CHECK(errors[2]->payload.at("request_id") == "q3");
}

TEST_CASE("deleting a zone disables the rules that use it") {
  Session s(fixture_scenario("sorting"), fixture_program("sorting"));
  s.submit(PauseCmd{});
  s.submit(DeleteZoneCmd{"yellow"});
  const auto events = s.tick();
  CHECK(has(events, EventKind::ZoneDeleted));
  const auto* disabled = first(events, EventKind::RuleDisabled);
  REQUIRE(disabled);
  CHECK(disabled->payload.at("rule") == "R1");
  const auto* w = first(events, EventKind::Warning);
  REQUIRE(w);
  CHECK(w->payload.at("code") == "rule-disabled");
  CHECK_FALSE(s.program().find_rule("R1")->enabled);
  CHECK(rebuild_program(s.trace().events()) == s.program());
}

TEST_CASE("zone edits and program loads replay from the trace") {
  Session s(fixture_scenario("conflict"), fixture_program("conflict"));
  s.submit(PauseCmd{});
  s.submit(UpdateZoneCmd{"green", {0.05, 0.05, 0.3, 0.3}});
  s.submit(CreateZoneCmd{"red", {0.6, 0.1, 0.2, 0.2}});
  s.submit(SaveProgramCmd{});
  s.tick();
  CHECK(rebuild_program(s.trace().events()) == s.program());
  CHECK(s.program().zones().front().color == "green");

  s.submit(LoadProgramCmd{zones_only("sorting")});
  const auto events = s.tick();
  CHECK(has(events, EventKind::ProgramLoaded));
  CHECK(s.program().zones().size() == 4);
  CHECK(rebuild_program(s.trace().events()) == s.program());
}

TEST_CASE("loading a program cancels an open conflict") {
  Session s(fixture_scenario("conflict"), fixture_program("conflict"));
  tick_until(s, until_kind(EventKind::ConflictRaised));
  s.submit(LoadProgramCmd{zones_only("conflict")});
  const auto events = s.tick();
  CHECK(has(events, EventKind::ConflictCancelled));
  CHECK_FALSE(s.arbiter().open());
}

TEST_CASE("a resolved choice that no longer binds is reported") {
  Session s(fixture_scenario("conflict"), fixture_program("conflict"));
  tick_until(s, until_kind(EventKind::ConflictRaised));
  s.submit(PauseCmd{});
  s.tick();
  // While paused, the human clears the green zone and the user answers.
  for (int i = 0; i < 12; ++i) {
    s.submit(HumanOpCmd{RelocateRequest{{.category = "bolt", .zone = "green"}, Point{0.45, 1.0}}});
  }
  s.submit(ResolveConflictCmd{std::nullopt, "R1", false});
  s.tick();
  s.submit(ResumeCmd{});
  const auto events = s.tick();
  const auto* w = first(events, EventKind::Warning);
  REQUIRE(w);
  CHECK(w->payload.at("code") == "binding-stale");
  CHECK_FALSE(has(events, EventKind::ActionStarted));
}

TEST_CASE("pace keeps to absolute deadlines and honours stop") {
  int calls = 0;
  const auto start = std::chrono::steady_clock::now();
  pace(20ms, {}, [&] { return ++calls < 10; });
  const auto elapsed = std::chrono::steady_clock::now() - start;
  CHECK(calls == 10);
  CHECK(elapsed >= 170ms);
  CHECK(elapsed < 400ms);

  std::stop_source stop;
  std::thread stopper([&] {
    std::this_thread::sleep_for(50ms);
    stop.request_stop();
  });
  const auto t0 = std::chrono::steady_clock::now();
  pace(10s, stop.get_token(), [] { return true; });
  CHECK(std::chrono::steady_clock::now() - t0 < 2s);
  stopper.join();
}
