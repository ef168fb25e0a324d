#pragma once

#include <array>
#include <algorithm>

namespace finex {

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

/// Four corners, clockwise from top-left, in page pixel coordinates.
using Quad = std::array<Point, 4>;

struct Rect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;
  long long area() const { return static_cast<long long>(w) * h; }
  friend bool operator==(const Rect&, const Rect&) = default;
};

inline Quad quad_from_box(double x0, double y0, double x1, double y1) {
  return {Point{x0, y0}, Point{x1, y0}, Point{x1, y1}, Point{x0, y1}};
}

inline double quad_min_x(const Quad& q) {
  return std::min({q[0].x, q[1].x, q[2].x, q[3].x});
}
inline double quad_max_x(const Quad& q) {
  return std::max({q[0].x, q[1].x, q[2].x, q[3].x});
}
inline double quad_min_y(const Quad& q) {
  return std::min({q[0].y, q[1].y, q[2].y, q[3].y});
}
inline double quad_max_y(const Quad& q) {
  return std::max({q[0].y, q[1].y, q[2].y, q[3].y});
}

/// True when no two non-adjacent edges cross and no corners coincide.
bool is_simple_quad(const Quad& q);

/// Crossing-number test; points on the boundary count as inside.
bool point_in_quad(const Quad& q, Point p);

double point_segment_distance(Point p, Point a, Point b);

}  // namespace finex
