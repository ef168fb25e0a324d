#include "finex/geometry.hpp"

#include <cmath>

namespace finex {

namespace {

double cross(Point o, Point a, Point b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool segments_intersect(Point p1, Point p2, Point q1, Point q2) {
  const double d1 = cross(q1, q2, p1);
  const double d2 = cross(q1, q2, p2);
  const double d3 = cross(p1, p2, q1);
  const double d4 = cross(p1, p2, q2);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
         ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

}  // namespace

bool is_simple_quad(const Quad& q) {
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      if (q[i] == q[j]) return false;
    }
  }
  return !segments_intersect(q[0], q[1], q[2], q[3]) &&
         !segments_intersect(q[1], q[2], q[3], q[0]);
}

double point_segment_distance(Point p, Point a, Point b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double cx = a.x + t * dx - p.x, cy = a.y + t * dy - p.y;
  return std::sqrt(cx * cx + cy * cy);
}

bool point_in_quad(const Quad& q, Point p) {
  for (int i = 0; i < 4; ++i) {
    if (point_segment_distance(p, q[i], q[(i + 1) % 4]) < 1e-9) return true;
  }
  bool inside = false;
  for (int i = 0, j = 3; i < 4; j = i++) {
    if ((q[i].y > p.y) != (q[j].y > p.y)) {
      const double x = (q[j].x - q[i].x) * (p.y - q[i].y) / (q[j].y - q[i].y) + q[i].x;
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

}  // namespace finex
