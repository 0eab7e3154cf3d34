#pragma once

#include <vector>

namespace slp {

/// Point in the workspace frame, meters. The workspace is viewed top-down:
/// x grows to the right, y grows downward (toward the human side).
struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

double distance(Point a, Point b);

/// Axis-aligned rectangle anchored at its top-left corner.
struct Rect {
  double x = 0.0;
  double y = 0.0;
  double width = 0.0;
  double height = 0.0;

  double right() const { return x + width; }
  double bottom() const { return y + height; }
  Point center() const { return {x + width / 2.0, y + height / 2.0}; }

  /// Closed rectangle: boundary points are inside.
  bool contains(Point p) const;
  /// True when the closed rectangles share at least one point.
  bool intersects(const Rect& other) const;
  /// True when `other` lies entirely inside this rectangle.
  bool covers(const Rect& other) const;

  friend bool operator==(const Rect&, const Rect&) = default;
};

/// Centers of a columns x rows uniform partition, row-major from the
/// top-left cell.
std::vector<Point> grid_cells(const Rect& rect, int columns, int rows);

}  // namespace slp
