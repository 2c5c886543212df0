#include "vmslod/geometry.hpp"

#include <algorithm>
#include <limits>

namespace vmslod {

double polygon_area(std::span<const Vec2> poly) {
  if (poly.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[(i + 1) % poly.size()];
    twice += a.cross(b);
  }
  return 0.5 * twice;
}

namespace {

// Clip against half-plane n.(p - p0) <= 0.
Polygon clip_half_plane(const Polygon& poly, Vec2 p0, Vec2 n) {
  Polygon out;
  const std::size_t m = poly.size();
  if (m == 0) return out;
  out.reserve(m + 2);
  for (std::size_t i = 0; i < m; ++i) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[(i + 1) % m];
    const double da = n.dot(a - p0);
    const double db = n.dot(b - p0);
    if (da <= 0.0) out.push_back(a);
    if ((da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0)) {
      const double t = da / (da - db);
      out.push_back(a + (b - a) * t);
    }
  }
  return out;
}

}  // namespace

Polygon clip_to_unit_square(std::span<const Vec2> poly) {
  Polygon p(poly.begin(), poly.end());
  p = clip_half_plane(p, {0.0, 0.0}, {-1.0, 0.0});  // x >= 0
  p = clip_half_plane(p, {1.0, 0.0}, {1.0, 0.0});   // x <= 1
  p = clip_half_plane(p, {0.0, 0.0}, {0.0, -1.0});  // y >= 0
  p = clip_half_plane(p, {0.0, 1.0}, {0.0, 1.0});   // y <= 1
  // Remove duplicate consecutive vertices introduced by clipping.
  Polygon dedup;
  for (const Vec2 v : p) {
    if (dedup.empty() || (v - dedup.back()).norm() > 1e-14) dedup.push_back(v);
  }
  if (dedup.size() > 1 && (dedup.front() - dedup.back()).norm() <= 1e-14)
    dedup.pop_back();
  return dedup;
}

namespace {

// Project both polygons on the axis and report the separation gap
// (positive if disjoint along this axis).
double axis_gap(std::span<const Vec2> a, std::span<const Vec2> b, Vec2 axis) {
  double amin = std::numeric_limits<double>::max(), amax = -amin;
  double bmin = amin, bmax = -amin;
  for (const Vec2 v : a) {
    const double p = axis.dot(v);
    amin = std::min(amin, p);
    amax = std::max(amax, p);
  }
  for (const Vec2 v : b) {
    const double p = axis.dot(v);
    bmin = std::min(bmin, p);
    bmax = std::max(bmax, p);
  }
  return std::max(bmin - amax, amin - bmax);
}

void collect_axes(std::span<const Vec2> poly, std::vector<Vec2>& axes) {
  const std::size_t m = poly.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Vec2 e = poly[(i + 1) % m] - poly[i];
    const double len = e.norm();
    if (len <= 1e-15) continue;
    axes.push_back({-e.y / len, e.x / len});
  }
}

}  // namespace

bool convex_polygons_intersect(std::span<const Vec2> a, std::span<const Vec2> b,
                               double tol) {
  if (a.empty() || b.empty()) return false;
  std::vector<Vec2> axes;
  collect_axes(a, axes);
  collect_axes(b, axes);
  if (axes.empty()) {
    // Two points (or point sets with no extent): compare directly.
    return axis_gap(a, b, {1.0, 0.0}) <= tol && axis_gap(a, b, {0.0, 1.0}) <= tol;
  }
  for (const Vec2 axis : axes) {
    if (axis_gap(a, b, axis) > tol) return false;
  }
  // Degenerate polygons (point/segment) contribute no axes of their own;
  // check the coordinate axes as a fallback for the all-degenerate case.
  return true;
}

bool point_in_convex_polygon(std::span<const Vec2> poly, Vec2 p, double tol) {
  if (poly.empty()) return false;
  if (poly.size() == 1) return (p - poly[0]).norm() <= tol;
  if (poly.size() == 2) {
    const Vec2 e = poly[1] - poly[0];
    const double len = e.norm();
    if (len <= 1e-15) return (p - poly[0]).norm() <= tol;
    const double along = e.dot(p - poly[0]) / len;
    const double off = std::abs(e.cross(p - poly[0])) / len;
    return off <= tol && along >= -tol && along <= len + tol;
  }
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[(i + 1) % poly.size()];
    if ((b - a).cross(p - a) < -tol) return false;
  }
  return true;
}

}  // namespace vmslod
