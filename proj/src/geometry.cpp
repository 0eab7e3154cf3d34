#include "slp/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace slp {

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

bool Rect::contains(Point p) const {
  return p.x >= x && p.x <= right() && p.y >= y && p.y <= bottom();
}

bool Rect::intersects(const Rect& other) const {
  return x <= other.right() && other.x <= right() && y <= other.bottom() &&
         other.y <= bottom();
}

bool Rect::covers(const Rect& other) const {
  return other.x >= x && other.right() <= right() && other.y >= y &&
         other.bottom() <= bottom();
}

std::vector<Point> grid_cells(const Rect& rect, int columns, int rows) {
  if (columns < 1 || rows < 1) {
    throw std::invalid_argument("grid needs at least one column and one row");
  }
  const double cell_w = rect.width / columns;
  const double cell_h = rect.height / rows;
  std::vector<Point> cells;
  cells.reserve(static_cast<std::size_t>(columns) * static_cast<std::size_t>(rows));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < columns; ++c) {
      cells.push_back({rect.x + (c + 0.5) * cell_w, rect.y + (r + 0.5) * cell_h});
    }
  }
  return cells;
}

}  // namespace slp
