#include <doctest.h>

#include <random>
#include <set>

#include "slp/geometry.hpp"

using namespace slp;

namespace {

bool near(Point a, Point b) { return distance(a, b) < 1e-9; }

}  // namespace

TEST_CASE("closed rectangle containment") {
  const Rect r{0, 0, 0.3, 0.3};
  CHECK(r.contains({0.15, 0.15}));
  CHECK(r.contains({0.3, 0.3}));
  CHECK(r.contains({0.0, 0.0}));
  CHECK_FALSE(r.contains({0.31, 0.15}));
  CHECK_FALSE(r.contains({0.15, -0.01}));
}

TEST_CASE("rectangle relations") {
  const Rect a{0, 0, 1, 1};
  CHECK(a.covers({0.2, 0.2, 0.5, 0.5}));
  CHECK(a.covers(a));
  CHECK_FALSE(a.covers({0.8, 0.8, 0.5, 0.5}));
  CHECK(a.intersects({0.8, 0.8, 0.5, 0.5}));
  CHECK(a.intersects({1.0, 0.0, 0.5, 0.5}));  // touching edges
  CHECK_FALSE(a.intersects({1.1, 0.0, 0.5, 0.5}));
  CHECK(near(a.center(), {0.5, 0.5}));
}

TEST_CASE("grid cells follow a uniform row-major partition") {
  auto cells = grid_cells({0, 0, 0.3, 0.3}, 1, 3);
  REQUIRE(cells.size() == 3);
  CHECK(near(cells[0], {0.15, 0.05}));
  CHECK(near(cells[1], {0.15, 0.15}));
  CHECK(near(cells[2], {0.15, 0.25}));

  auto one = grid_cells({0.2, 0.4, 0.2, 0.1}, 1, 1);
  REQUIRE(one.size() == 1);
  CHECK(near(one[0], {0.3, 0.45}));

  auto four = grid_cells({0, 0, 0.4, 0.2}, 2, 2);
  REQUIRE(four.size() == 4);
  CHECK(near(four[0], {0.1, 0.05}));
  CHECK(near(four[1], {0.3, 0.05}));
  CHECK(near(four[2], {0.1, 0.15}));
  CHECK(near(four[3], {0.3, 0.15}));

  CHECK_THROWS(grid_cells({0, 0, 1, 1}, 0, 1));
  CHECK_THROWS(grid_cells({0, 0, 1, 1}, 1, -2));
}

TEST_CASE("grid cells are distinct and inside the rectangle") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  std::uniform_real_distribution<double> size(0.01, 2.0);
  std::uniform_int_distribution<int> count(1, 7);
  for (int i = 0; i < 500; ++i) {
    const Rect r{coord(rng), coord(rng), size(rng), size(rng)};
    const int cols = count(rng);
    const int rows = count(rng);
    const auto cells = grid_cells(r, cols, rows);
    REQUIRE(cells.size() == static_cast<std::size_t>(cols * rows));
    std::set<std::pair<double, double>> unique;
    for (auto p : cells) {
      CHECK(r.contains(p));
      unique.insert({p.x, p.y});
    }
    CHECK(unique.size() == cells.size());
  }
}
