#ifndef VMSLOD_GEOMETRY_HPP
#define VMSLOD_GEOMETRY_HPP

#include <array>
#include <cmath>
#include <span>
#include <vector>

namespace vmslod {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double cross(Vec2 o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
  /// Rotation by +90 degrees (counterclockwise).
  Vec2 rot90() const { return {-y, x}; }
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }

/// Convex polygon, counterclockwise vertex order. May be degenerate
/// (segment or point) after clipping.
using Polygon = std::vector<Vec2>;

double polygon_area(std::span<const Vec2> poly);

/// Sutherland-Hodgman clip of a convex polygon against the closed unit
/// square [0,1]^2.
Polygon clip_to_unit_square(std::span<const Vec2> poly);

/// Closed-set intersection test between two convex polygons (separating
/// axis). Touching counts as intersecting; `tol` absorbs roundoff so a
/// gap smaller than tol still counts as contact.
bool convex_polygons_intersect(std::span<const Vec2> a, std::span<const Vec2> b,
                               double tol = 1e-12);

/// Whether a point lies in the closed convex polygon (CCW order).
bool point_in_convex_polygon(std::span<const Vec2> poly, Vec2 p,
                             double tol = 1e-12);

}  // namespace vmslod

#endif
