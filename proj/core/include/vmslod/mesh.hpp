#ifndef VMSLOD_MESH_HPP
#define VMSLOD_MESH_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "vmslod/geometry.hpp"

namespace vmslod {

/// Conforming triangulation of the unit square: an n x n grid of squares,
/// each split by the diagonal from lower-left to upper-right. Nodes are
/// numbered row-major with x running fastest; the two triangles of square
/// (i,j) are stored consecutively, lower one first, both counterclockwise.
struct TriMesh {
  int n = 0;
  std::vector<Vec2> nodes;
  std::vector<std::array<int, 3>> triangles;
  std::vector<std::uint8_t> boundary_node;

  int node_index(int i, int j) const { return j * (n + 1) + i; }
  int node_count() const { return static_cast<int>(nodes.size()); }
  int triangle_count() const { return static_cast<int>(triangles.size()); }

  Vec2 barycenter(int t) const {
    const auto& tri = triangles[t];
    return (nodes[tri[0]] + nodes[tri[1]] + nodes[tri[2]]) * (1.0 / 3.0);
  }
  double triangle_area(int t) const {
    const auto& tri = triangles[t];
    const Vec2 d1 = nodes[tri[1]] - nodes[tri[0]];
    const Vec2 d2 = nodes[tri[2]] - nodes[tri[0]];
    return 0.5 * d1.cross(d2);
  }
  /// Longest edge over the mesh, sqrt(2)/n for this family.
  double mesh_size() const;

  /// Number of triangles incident to each node.
  std::vector<int> incidence_counts() const;

  std::vector<int> interior_nodes() const;
};

TriMesh build_uniform_tri_mesh(int n);

/// Two nested triangulations with node and element correspondence. The
/// fine mesh refines the coarse one, so every coarse node coincides with a
/// fine node and every fine triangle lies in exactly one coarse triangle.
struct MeshHierarchy {
  TriMesh coarse;
  TriMesh fine;
  int ratio = 1;  // fine.n / coarse.n
  std::vector<int> coarse_to_fine_node;
  std::vector<int> fine_elem_parent;
  std::vector<std::vector<int>> coarse_elem_children;
};

MeshHierarchy build_hierarchy(int coarse_n, int fine_n);

/// Velocity-biased patch region: the convex hull of
///   mid +- l*H*t + l*H*b   and   mid +- l*H*t - l*(H^2/eps)*b,
/// t = b rotated +90 degrees, together with its clip against the closed
/// unit square.
struct Rect {
  std::array<Vec2, 4> corners;
  Polygon clipped;
};

Rect directional_patch_region(Vec2 mid, int ell, Vec2 b, double H, double epsilon);

/// Indices of the triangles whose closed set meets the closed clipped
/// region (boundary contact included).
std::vector<int> elements_intersecting(const TriMesh& mesh, const Rect& region);

}  // namespace vmslod

#endif
