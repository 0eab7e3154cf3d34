#include <doctest.h>

#include <random>

#include "slp/error.hpp"
#include "slp/world.hpp"
#include "support.hpp"

using namespace slp;
using namespace slp::test;

namespace {

const char* kAssemblyLike = R"({
  "name": "bench",
  "tables": [{"name": "robot", "rect": [0, 0, 1, 1]}],
  "categories": [
    {"name": "holder", "container": true, "states": ["empty", "full", "assembled"]},
    {"name": "top"}, {"name": "bolt"},
    {"name": "box", "container": true},
    {"name": "kit", "container": true, "detectable": false}
  ],
  "objects": [
    {"category": "holder", "position": [0.1, 0.1]},
    {"category": "holder", "position": [0.5, 0.5], "state": "full"},
    {"category": "top", "position": [0.2, 0.2]},
    {"category": "bolt", "position": [0.3, 0.3]},
    {"category": "box", "position": [0.8, 0.8]},
    {"category": "kit", "position": [0.9, 0.1]}
  ],
  "combinations": [
    {"part": "top", "target": "holder", "required_state": "empty", "resulting_state": "full", "part_fate": "attached"},
    {"part": "bolt", "target": "holder", "required_state": "full", "resulting_state": "assembled", "part_fate": "absorbed"}
  ]
})";

}  // namespace

TEST_CASE("sorting fixture loads nine parts and three labelled boxes") {
  auto s = fixture_scenario("sorting");
  CHECK(s->initial_objects.size() == 12);
  int parts = 0, boxes = 0;
  for (const auto& o : s->initial_objects) {
    if (o.category == "box") {
      ++boxes;
      CHECK(o.label.has_value());
    } else {
      ++parts;
    }
  }
  CHECK(parts == 9);
  CHECK(boxes == 3);
  CHECK(s->category("box").is_container);
}

TEST_CASE("scenario loading errors") {
  SUBCASE("empty world is valid") {
    auto s = load_scenario(R"({"name": "empty", "tables": [{"name": "t", "rect": [0,0,1,1]}],
                               "categories": [], "objects": []})");
    World w(std::make_shared<const Scenario>(s));
    CHECK(w.objects().empty());
  }
  SUBCASE("undeclared state in a combination") {
    CHECK_THROWS_AS(load_scenario(R"({"name": "x", "tables": [{"name": "t", "rect": [0,0,1,1]}],
      "categories": [{"name": "holder", "states": ["empty"]}, {"name": "bolt"}],
      "combinations": [{"part": "bolt", "target": "holder", "required_state": "empty",
                        "resulting_state": "welded", "part_fate": "absorbed"}]})"),
                    ReferenceError);
  }
  SUBCASE("unknown category") {
    CHECK_THROWS_AS(load_scenario(R"({"name": "x", "tables": [{"name": "t", "rect": [0,0,1,1]}],
      "categories": [], "objects": [{"category": "ghost", "position": [0.5, 0.5]}]})"),
                    ReferenceError);
  }
  SUBCASE("syntax error names the line") {
    try {
      load_scenario("{\n\"name\": \"x\",\n\"tables\": [\n");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.where().rfind("line ", 0) == 0);
    }
  }
  SUBCASE("field error names the field") {
    try {
      load_scenario(R"({"name": "x", "tables": [{"name": "t", "rect": [0, 0, -1, 1]}]})");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.where() == "/tables/0/rect");
    }
  }
  SUBCASE("objects must sit on a table") {
    CHECK_THROWS_AS(load_scenario(R"({"name": "x", "tables": [{"name": "t", "rect": [0,0,1,1]}],
      "categories": [{"name": "bolt"}], "objects": [{"category": "bolt", "position": [2, 2]}]})"),
                    ParseError);
  }
}

TEST_CASE("perceived view filters undetectable categories") {
  auto s = fixture_scenario("kitting");
  World w(s);
  auto view = perceived_view(w, {}, s->perception);
  CHECK(w.objects().size() == 15);
  CHECK(view.objects.size() == 12);
  for (const auto& o : view.objects) CHECK(o.category != "kit-box");
  for (std::size_t i = 1; i < view.objects.size(); ++i) {
    CHECK(view.objects[i - 1].id < view.objects[i].id);
  }

  SUBCASE("identity when everything is detectable") {
    auto sorting = fixture_scenario("sorting");
    World ws(sorting);
    CHECK(perceived_view(ws, {}, sorting->perception).objects == ws.objects());
  }
  SUBCASE("zones survive an empty world") {
    auto e = scenario_from(R"({"name": "e", "tables": [{"name": "t", "rect": [0,0,1,1]}]})");
    World we(e);
    std::vector<Zone> zones{{"Z1", "green", {0, 0, 0.5, 0.5}, 0}};
    auto v = perceived_view(we, zones, e->perception);
    CHECK(v.objects.empty());
    CHECK(v.zones == zones);
  }
  SUBCASE("pure: repeated calls agree") {
    CHECK(perceived_view(w, {}, s->perception, 3) == perceived_view(w, {}, s->perception, 3));
  }
}

TEST_CASE("field of view hides the human table bolts in assembly") {
  auto s = fixture_scenario("assembly");
  World w(s);
  auto view = perceived_view(w, {}, s->perception);
  for (const auto& o : view.objects) CHECK(o.category != "bolt");
  CHECK(view.objects.size() == 6);
}

TEST_CASE("position noise is deterministic in seed and tick") {
  auto base = load_scenario(kAssemblyLike);
  base.perception.position_noise = 0.01;
  auto s = std::make_shared<const Scenario>(base);
  World w(s);
  auto a = perceived_view(w, {}, s->perception, 4, 99);
  auto b = perceived_view(w, {}, s->perception, 4, 99);
  auto c = perceived_view(w, {}, s->perception, 5, 99);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  for (std::size_t i = 0; i < a.objects.size(); ++i) {
    const auto& truth = w.get(a.objects[i].id).position;
    CHECK(std::abs(a.objects[i].position.x - truth.x) <= 0.01);
    CHECK(std::abs(a.objects[i].position.y - truth.y) <= 0.01);
  }
}

TEST_CASE("human combine follows the combination rules") {
  auto s = scenario_from(kAssemblyLike);
  World w(s);
  // ids: 1 holder(empty) 2 holder(full) 3 top 4 bolt 5 box 6 kit
  SUBCASE("bolt into a full holder assembles it and absorbs the bolt") {
    apply_human_action(w, Combine{4, 2});
    CHECK(w.get(2).state == "assembled");
    CHECK(w.find(4) == nullptr);
  }
  SUBCASE("top onto an empty holder fills it and stays attached") {
    apply_human_action(w, Combine{3, 1});
    CHECK(w.get(1).state == "full");
    CHECK(w.get(3).contained_in == 1);
    CHECK(w.get(3).position == w.get(1).position);
  }
  SUBCASE("bolt into an empty holder is rejected and nothing changes") {
    const auto before = w.objects();
    CHECK_THROWS_AS(apply_human_action(w, Combine{4, 1}), StateError);
    CHECK(w.objects() == before);
  }
  SUBCASE("unknown ids are reference errors") {
    CHECK_THROWS_AS(apply_human_action(w, Combine{77, 1}), ReferenceError);
    CHECK_THROWS_AS(apply_human_action(w, Relocate{77, Point{0.5, 0.5}}), ReferenceError);
  }
}

TEST_CASE("relocating a container carries its contents") {
  auto s = scenario_from(kAssemblyLike);
  World w(s);
  apply_human_action(w, Relocate{4, ObjectId{5}});  // bolt into box
  apply_human_action(w, Relocate{3, ObjectId{5}});  // top into box
  CHECK(w.get(4).contained_in == 5);
  apply_human_action(w, Relocate{5, Point{0.6, 0.2}});
  for (ObjectId id : {ObjectId{3}, ObjectId{4}, ObjectId{5}}) {
    CHECK(w.get(id).position == Point{0.6, 0.2});
  }
  CHECK(w.containment_consistent());
  // Taking a part out of the box detaches it.
  apply_human_action(w, Relocate{4, Point{0.1, 0.9}});
  CHECK(w.get(4).top_level());
  CHECK(w.get(5).attached == std::vector<ObjectId>{3});
}

TEST_CASE("containment stays acyclic under random human operations") {
  auto s = scenario_from(kAssemblyLike);
  std::mt19937 rng(5);
  for (int round = 0; round < 50; ++round) {
    World w(s);
    for (int step = 0; step < 30; ++step) {
      const auto& objs = w.objects();
      if (objs.empty()) break;
      std::uniform_int_distribution<std::size_t> pick(0, objs.size() - 1);
      const ObjectId a = objs[pick(rng)].id;
      const ObjectId b = objs[pick(rng)].id;
      std::uniform_int_distribution<int> kind(0, 3);
      std::uniform_real_distribution<double> coord(0.0, 1.0);
      HumanOp op;
      switch (kind(rng)) {
        case 0: op = Relocate{a, Point{coord(rng), coord(rng)}}; break;
        case 1: op = Relocate{a, b}; break;
        case 2: op = Combine{a, b}; break;
        default: op = Spawn{"top", Point{coord(rng), coord(rng)}}; break;
      }
      const auto before = w.objects();
      try {
        apply_human_action(w, op);
      } catch (const Error&) {
        CHECK(w.objects() == before);
      }
      REQUIRE(w.containment_consistent());
    }
  }
}

TEST_CASE("combine changes exactly one state and one part") {
  auto s = scenario_from(kAssemblyLike);
  World w(s);
  const auto before = w.objects();
  apply_human_action(w, Combine{3, 1});
  int state_changes = 0, moved = 0;
  for (const auto& old : before) {
    const auto* now = w.find(old.id);
    REQUIRE(now != nullptr);
    if (now->state != old.state) ++state_changes;
    if (now->contained_in != old.contained_in) ++moved;
    if (old.id != 1 && old.id != 3) CHECK(*now == old);
  }
  CHECK(state_changes == 1);
  CHECK(moved == 1);
}

TEST_CASE("next free grid cell") {
  auto s = scenario_from(kAssemblyLike);
  const Rect pallet{0.6, 0.0, 0.1, 0.3};
  World w(s);
  auto cells = grid_cells(pallet, 1, 3);
  CHECK(next_free_cell(w, pallet, 1, 3, 0.03) == cells[0]);
  apply_human_action(w, Relocate{3, cells[0]});
  apply_human_action(w, Relocate{4, cells[1]});
  CHECK(next_free_cell(w, pallet, 1, 3, 0.03) == cells[2]);
  apply_human_action(w, Relocate{1, cells[2]});
  CHECK_FALSE(next_free_cell(w, pallet, 1, 3, 0.03).has_value());
}

TEST_CASE("reset restores the initial placement with fresh ids") {
  auto s = scenario_from(kAssemblyLike);
  World w(s);
  apply_human_action(w, Combine{4, 2});
  w.reset();
  REQUIRE(w.objects().size() == 6);
  CHECK(w.objects().front().id == 7);
  CHECK(w.objects()[1].state == "full");
}
