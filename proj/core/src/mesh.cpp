#include "vmslod/mesh.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "vmslod/errors.hpp"

namespace vmslod {

double TriMesh::mesh_size() const {
  double longest = 0.0;
  for (int t = 0; t < triangle_count(); ++t) {
    const auto& tri = triangles[t];
    for (int e = 0; e < 3; ++e) {
      const double len = (nodes[tri[(e + 1) % 3]] - nodes[tri[e]]).norm();
      longest = std::max(longest, len);
    }
  }
  return longest;
}

std::vector<int> TriMesh::incidence_counts() const {
  std::vector<int> count(nodes.size(), 0);
  for (const auto& tri : triangles)
    for (const int v : tri) ++count[v];
  return count;
}

std::vector<int> TriMesh::interior_nodes() const {
  std::vector<int> out;
  for (int v = 0; v < node_count(); ++v)
    if (!boundary_node[v]) out.push_back(v);
  return out;
}

TriMesh build_uniform_tri_mesh(int n) {
  if (n < 1) throw ConfigError("build_uniform_tri_mesh: n must be >= 1, got " + std::to_string(n));
  TriMesh m;
  m.n = n;
  m.nodes.reserve((n + 1) * (n + 1));
  m.boundary_node.reserve((n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      m.nodes.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});
      m.boundary_node.push_back(i == 0 || i == n || j == 0 || j == n ? 1 : 0);
    }
  }
  m.triangles.reserve(2 * n * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int v00 = m.node_index(i, j);
      const int v10 = m.node_index(i + 1, j);
      const int v01 = m.node_index(i, j + 1);
      const int v11 = m.node_index(i + 1, j + 1);
      m.triangles.push_back({v00, v10, v11});
      m.triangles.push_back({v00, v11, v01});
    }
  }
  return m;
}

MeshHierarchy build_hierarchy(int coarse_n, int fine_n) {
  if (coarse_n < 1 || fine_n < 1 || fine_n % coarse_n != 0)
    throw ConfigError("build_hierarchy: fine_n must be a positive multiple of coarse_n, got coarse_n=" +
                      std::to_string(coarse_n) + ", fine_n=" + std::to_string(fine_n));
  MeshHierarchy h;
  h.coarse = build_uniform_tri_mesh(coarse_n);
  h.fine = build_uniform_tri_mesh(fine_n);
  h.ratio = fine_n / coarse_n;
  const int m = h.ratio;

  h.coarse_to_fine_node.resize(h.coarse.node_count());
  for (int J = 0; J <= coarse_n; ++J)
    for (int I = 0; I <= coarse_n; ++I)
      h.coarse_to_fine_node[h.coarse.node_index(I, J)] = h.fine.node_index(I * m, J * m);

  h.fine_elem_parent.resize(h.fine.triangle_count());
  h.coarse_elem_children.assign(h.coarse.triangle_count(), {});
  for (int t = 0; t < h.fine.triangle_count(); ++t) {
    const int square = t / 2;
    const bool lower = (t % 2 == 0);
    const int i = square % fine_n;
    const int j = square / fine_n;
    const int I = i / m, J = j / m;
    const int li = i - I * m, lj = j - J * m;
    // Fine squares strictly below the coarse diagonal (li > lj) sit in the
    // lower coarse triangle, strictly above in the upper one; squares on
    // the diagonal are split by it exactly along their own diagonal.
    bool in_lower;
    if (li > lj) in_lower = true;
    else if (li < lj) in_lower = false;
    else in_lower = lower;
    const int parent = 2 * (J * coarse_n + I) + (in_lower ? 0 : 1);
    h.fine_elem_parent[t] = parent;
    h.coarse_elem_children[parent].push_back(t);
  }
  return h;
}

Rect directional_patch_region(Vec2 mid, int ell, Vec2 b, double H, double epsilon) {
  if (ell < 1) throw ConfigError("directional_patch_region: ell must be >= 1");
  if (!(epsilon > 0.0 && epsilon <= 1.0))
    throw ConfigError("directional_patch_region: epsilon must lie in (0,1]");
  if (std::abs(b.norm() - 1.0) > 1e-9)
    throw ConfigError("directional_patch_region: b must be a unit vector");
  const Vec2 t = b.rot90();
  const double down = ell * H;
  const double cross = ell * H;
  const double up = ell * H * H / epsilon;
  Rect r;
  r.corners = {mid - cross * t + down * b, mid + cross * t + down * b,
               mid + cross * t - up * b, mid - cross * t - up * b};
  r.clipped = clip_to_unit_square(r.corners);
  return r;
}

std::vector<int> elements_intersecting(const TriMesh& mesh, const Rect& region) {
  std::vector<int> out;
  if (region.clipped.empty()) return out;
  constexpr double tol = 1e-12;
  double rx0 = 2, rx1 = -2, ry0 = 2, ry1 = -2;
  for (const Vec2 v : region.clipped) {
    rx0 = std::min(rx0, v.x);
    rx1 = std::max(rx1, v.x);
    ry0 = std::min(ry0, v.y);
    ry1 = std::max(ry1, v.y);
  }
  std::array<Vec2, 3> tri;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    tri = {mesh.nodes[mesh.triangles[t][0]], mesh.nodes[mesh.triangles[t][1]],
           mesh.nodes[mesh.triangles[t][2]]};
    const double tx0 = std::min({tri[0].x, tri[1].x, tri[2].x});
    const double tx1 = std::max({tri[0].x, tri[1].x, tri[2].x});
    const double ty0 = std::min({tri[0].y, tri[1].y, tri[2].y});
    const double ty1 = std::max({tri[0].y, tri[1].y, tri[2].y});
    if (tx1 < rx0 - tol || tx0 > rx1 + tol || ty1 < ry0 - tol || ty0 > ry1 + tol) continue;
    if (convex_polygons_intersect(tri, region.clipped)) out.push_back(t);
  }
  return out;
}

}  // namespace vmslod
