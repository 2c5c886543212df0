#include "vmslod/multiscale.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_map>

#include "vmslod/csv.hpp"
#include "vmslod/errors.hpp"
#include "vmslod/parallel.hpp"

namespace vmslod {

KernelSpace build_kernel_space(const MeshHierarchy& h) {
  KernelSpace ks;
  const int nf = h.fine.node_count();
  std::vector<std::uint8_t> image(nf, 0);
  for (const int f : h.coarse_to_fine_node) image[f] = 1;
  ks.local_of.assign(nf, -1);
  for (int v = 0; v < nf; ++v) {
    if (!h.fine.boundary_node[v] && !image[v]) {
      ks.local_of[v] = static_cast<int>(ks.dofs.size());
      ks.dofs.push_back(v);
    }
  }
  ks.incidence = h.fine.incidence_counts();
  return ks;
}

namespace {

struct HatWeight {
  int coarse_node;
  double weight;
};

// P1 weights of the coarse basis at fine node (up to three nonzeros),
// derived from the integer grid decomposition; exact at coarse images.
int hat_weights(const MeshHierarchy& h, int fine_node, HatWeight out[3]) {
  const int fn = h.fine.n;
  const int cn = h.coarse.n;
  const int m = h.ratio;
  const int i = fine_node % (fn + 1);
  const int j = fine_node / (fn + 1);
  const int I = std::min(i / m, cn - 1);
  const int J = std::min(j / m, cn - 1);
  const int li = i - I * m;
  const int lj = j - J * m;
  const double inv = 1.0 / m;
  int k = 0;
  auto push = [&](int ci, int cj, double w) {
    if (w != 0.0) out[k++] = {h.coarse.node_index(ci, cj), w};
  };
  if (lj <= li) {  // lower triangle (v00, v10, v11)
    push(I, J, (m - li) * inv);
    push(I + 1, J, (li - lj) * inv);
    push(I + 1, J + 1, lj * inv);
  } else {  // upper triangle (v00, v11, v01)
    push(I, J, (m - lj) * inv);
    push(I + 1, J + 1, li * inv);
    push(I, J + 1, (lj - li) * inv);
  }
  return k;
}

}  // namespace

FeFunction nodal_interpolation(const MeshHierarchy& h, const FeFunction& fine) {
  FeFunction c;
  c.mesh = &h.coarse;
  c.values.resize(h.coarse.node_count());
  for (int z = 0; z < h.coarse.node_count(); ++z)
    c.values[z] = fine.values[h.coarse_to_fine_node[z]];
  return c;
}

FeFunction prolongate(const MeshHierarchy& h, const FeFunction& coarse) {
  FeFunction f;
  f.mesh = &h.fine;
  f.values = Eigen::VectorXd::Zero(h.fine.node_count());
  HatWeight w[3];
  for (int v = 0; v < h.fine.node_count(); ++v) {
    const int k = hat_weights(h, v, w);
    double acc = 0.0;
    for (int q = 0; q < k; ++q) acc += w[q].weight * coarse.values[w[q].coarse_node];
    f.values[v] = acc;
  }
  return f;
}

SparseMat prolongation_matrix(const MeshHierarchy& h) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(3 * h.fine.node_count());
  HatWeight w[3];
  for (int v = 0; v < h.fine.node_count(); ++v) {
    const int k = hat_weights(h, v, w);
    for (int q = 0; q < k; ++q) trip.emplace_back(v, w[q].coarse_node, w[q].weight);
  }
  SparseMat P(h.fine.node_count(), h.coarse.node_count());
  P.setFromTriplets(trip.begin(), trip.end());
  return P;
}

double coarse_hat_value(const MeshHierarchy& h, int coarse_node, int fine_node) {
  HatWeight w[3];
  const int k = hat_weights(h, fine_node, w);
  for (int q = 0; q < k; ++q)
    if (w[q].coarse_node == coarse_node) return w[q].weight;
  return 0.0;
}

namespace {

SparseMat assemble_mass(const TriMesh& mesh) {
  static const double local[3][3] = {{2, 1, 1}, {1, 2, 1}, {1, 1, 2}};
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(9 * mesh.triangle_count());
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const double s = mesh.triangle_area(t) / 12.0;
    const auto& tri = mesh.triangles[t];
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) trip.emplace_back(tri[r], tri[c], s * local[r][c]);
  }
  SparseMat M(mesh.node_count(), mesh.node_count());
  M.setFromTriplets(trip.begin(), trip.end());
  return M;
}

}  // namespace

double estimate_interp_constant(const MeshHierarchy& h, int samples, unsigned seed) {
  if (samples < 1) throw ConfigError("estimate_interp_constant: samples must be >= 1");
  const SparseMat K = assemble_stiffness(h.fine);
  const SparseMat M = assemble_mass(h.fine);
  const double H = std::sqrt(2.0) / h.coarse.n;
  const std::vector<int> fine_int = h.fine.interior_nodes();
  const std::vector<int> coarse_int = h.coarse.interior_nodes();
  Eigen::VectorXd inv_diag(h.fine.node_count());
  for (int q = 0; q < h.fine.node_count(); ++q) inv_diag[q] = 1.0 / K.coeff(q, q);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  // Cycle through sample families; pure white noise alone never excites the
  // constant (its interpolant is negligible against the noise energy).
  // Sample 0 is a prolongated coarse function, pinning the estimate at >= 1.
  double best = 0.0;
  for (int s = 0; s < samples; ++s) {
    FeFunction v;
    v.mesh = &h.fine;
    const int family = (s == 0) ? 0 : 1 + (s - 1) % 4;
    if (family == 0) {
      FeFunction w;
      w.mesh = &h.coarse;
      w.values = Eigen::VectorXd::Zero(h.coarse.node_count());
      for (const int z : coarse_int) w.values[z] = gauss(rng);
      v = prolongate(h, w);
    } else if (family == 1) {  // white noise on every interior node
      v.values = Eigen::VectorXd::Zero(h.fine.node_count());
      for (const int q : fine_int) v.values[q] = gauss(rng);
    } else if (family == 2) {  // spikes at the coarse images only
      v.values = Eigen::VectorXd::Zero(h.fine.node_count());
      for (const int z : coarse_int) v.values[h.coarse_to_fine_node[z]] = gauss(rng);
    } else {  // damped-Jacobi-smoothed noise (family 3: light, 4: heavy)
      v.values = Eigen::VectorXd::Zero(h.fine.node_count());
      for (const int q : fine_int) v.values[q] = gauss(rng);
      const int sweeps = (family == 3) ? 2 : 8;
      for (int it = 0; it < sweeps; ++it) {
        const Eigen::VectorXd r = K * v.values;
        for (const int q : fine_int) v.values[q] -= 0.5 * inv_diag[q] * r[q];
      }
    }
    const double seminorm = std::sqrt(v.values.dot(K * v.values));
    if (seminorm < 1e-14) continue;
    v.values /= seminorm;
    const FeFunction piv = prolongate(h, nodal_interpolation(h, v));
    const Eigen::VectorXd diff = v.values - piv.values;
    const double l2 = std::sqrt(diff.dot(M * diff));
    const double h1 = std::sqrt(piv.values.dot(K * piv.values));
    best = std::max(best, std::max(l2 / H, h1));
  }
  return best;
}

Patch build_patch(const MeshHierarchy& h, const KernelSpace& kernel, int T,
                  int ell, Vec2 b, double epsilon) {
  Patch p;
  p.element = T;
  p.ell = ell;
  if (ell == ell_infinity) {
    p.region.corners = {Vec2{0, 0}, Vec2{1, 0}, Vec2{1, 1}, Vec2{0, 1}};
    p.region.clipped = {Vec2{0, 0}, Vec2{1, 0}, Vec2{1, 1}, Vec2{0, 1}};
    p.coarse_elements.resize(h.coarse.triangle_count());
    for (int t = 0; t < h.coarse.triangle_count(); ++t) p.coarse_elements[t] = t;
    p.kernel_dofs = kernel.dofs;
    return p;
  }
  const double H = std::sqrt(2.0) / h.coarse.n;  // longest edge of the coarse mesh
  p.region = directional_patch_region(h.coarse.barycenter(T), ell, b, H, epsilon);
  p.coarse_elements = elements_intersecting(h.coarse, p.region);

  // A kernel node belongs to the patch iff all its incident fine triangles
  // are children of patch elements; collect children nodes and compare
  // occurrence counts with the full incidence.
  std::vector<int> touched;
  std::size_t children = 0;
  for (const int K : p.coarse_elements) children += h.coarse_elem_children[K].size();
  touched.reserve(3 * children);
  for (const int K : p.coarse_elements)
    for (const int t : h.coarse_elem_children[K])
      for (const int v : h.fine.triangles[t]) touched.push_back(v);
  std::sort(touched.begin(), touched.end());
  for (std::size_t q = 0; q < touched.size();) {
    const int node = touched[q];
    std::size_t r = q;
    while (r < touched.size() && touched[r] == node) ++r;
    if (kernel.is_kernel(node) && static_cast<int>(r - q) == kernel.incidence[node])
      p.kernel_dofs.push_back(node);
    q = r;
  }
  return p;
}

PatchSystem::PatchSystem(const AssembledOperator& fine_op, std::vector<int> dofs)
    : dofs_(std::move(dofs)) {
  const int nd = static_cast<int>(dofs_.size());
  std::vector<int> local(fine_op.size(), -1);
  for (int k = 0; k < nd; ++k) local[dofs_[k]] = k;

  // M(i, j) = a(w_i, phi_j) = full(dof_j, dof_i): transposed restriction.
  std::vector<Eigen::Triplet<double>> trip;
  for (const int c : dofs_) {
    for (SparseMat::InnerIterator it(fine_op.full, c); it; ++it) {
      const int r = static_cast<int>(it.row());
      if (local[r] >= 0) trip.emplace_back(local[c], local[r], it.value());
    }
  }
  SparseMat M(nd, nd);
  M.setFromTriplets(trip.begin(), trip.end());
  lu_.compute(M);
  if (lu_.info() != Eigen::Success)
    throw SolverError("PatchSystem: factorization of the corrector system failed (" +
                      std::to_string(nd) + " dofs): " + lu_.lastErrorMessage());
}

Eigen::VectorXd PatchSystem::solve(const Eigen::VectorXd& rhs) const {
  return lu_.solve(rhs);
}

std::vector<std::pair<int, double>> element_corrector_rhs(
    const MeshHierarchy& h, const AssembledOperator& fine_op, int T,
    const Eigen::VectorXd& v_fine) {
  std::vector<std::pair<int, double>> out;
  const auto& children = h.coarse_elem_children[T];
  out.reserve(3 * children.size());
  for (const int t : children) {
    const P1Gradients e = p1_gradients(h.fine, t);
    const auto& tri = h.fine.triangles[t];
    const double v0 = v_fine[tri[0]], v1 = v_fine[tri[1]], v2 = v_fine[tri[2]];
    const Vec2 gradv = e.grad[0] * v0 + e.grad[1] * v1 + e.grad[2] * v2;
    const double third_sum = (v0 + v1 + v2) * e.area / 3.0;
    for (int a = 0; a < 3; ++a) {
      const double val =
          fine_op.epsilon * e.area * e.grad[a].dot(gradv) + fine_op.velocity.dot(e.grad[a]) * third_sum;
      out.emplace_back(tri[a], val);
    }
  }
  return out;
}

namespace {

// RHS with v = lambda_z evaluated matrix-free; avoids materializing the
// prolongated hat per (T, z) pair.
std::vector<std::pair<int, double>> element_rhs_hat(const MeshHierarchy& h,
                                                    const AssembledOperator& fine_op,
                                                    int T, int z) {
  std::vector<std::pair<int, double>> out;
  const auto& children = h.coarse_elem_children[T];
  out.reserve(3 * children.size());
  for (const int t : children) {
    const P1Gradients e = p1_gradients(h.fine, t);
    const auto& tri = h.fine.triangles[t];
    const double v0 = coarse_hat_value(h, z, tri[0]);
    const double v1 = coarse_hat_value(h, z, tri[1]);
    const double v2 = coarse_hat_value(h, z, tri[2]);
    const Vec2 gradv = e.grad[0] * v0 + e.grad[1] * v1 + e.grad[2] * v2;
    const double third_sum = (v0 + v1 + v2) * e.area / 3.0;
    for (int a = 0; a < 3; ++a) {
      const double val =
          fine_op.epsilon * e.area * e.grad[a].dot(gradv) + fine_op.velocity.dot(e.grad[a]) * third_sum;
      out.emplace_back(tri[a], val);
    }
  }
  return out;
}

Eigen::VectorXd restrict_rhs(const std::vector<std::pair<int, double>>& pairs,
                             const std::vector<int>& dofs) {
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<int>(dofs.size()));
  for (const auto& [node, val] : pairs) {
    const auto it = std::lower_bound(dofs.begin(), dofs.end(), node);
    if (it != dofs.end() && *it == node) rhs[static_cast<int>(it - dofs.begin())] += val;
  }
  return rhs;
}

struct PatchGroup {
  std::vector<int> kernel_dofs;
  std::vector<int> members;  // coarse elements, ascending
};

std::vector<PatchGroup> group_patches(std::vector<Patch>& patches) {
  // Elements whose patches share the same kernel dof set (saturated
  // patches, the global case) share one factorization.
  std::vector<PatchGroup> groups;
  std::unordered_map<std::size_t, std::vector<int>> by_hash;
  auto hash_dofs = [](const std::vector<int>& d) {
    std::size_t s = 1469598103934665603ull;
    for (const int v : d) {
      s ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ull;
      s *= 1099511628211ull;
    }
    return s;
  };
  for (int T = 0; T < static_cast<int>(patches.size()); ++T) {
    if (patches[T].kernel_dofs.empty()) continue;
    const std::size_t key = hash_dofs(patches[T].kernel_dofs);
    auto& candidates = by_hash[key];
    int found = -1;
    for (const int g : candidates) {
      if (groups[g].kernel_dofs == patches[T].kernel_dofs) {
        found = g;
        break;
      }
    }
    if (found < 0) {
      found = static_cast<int>(groups.size());
      groups.push_back({patches[T].kernel_dofs, {}});
      candidates.push_back(found);
    }
    groups[found].members.push_back(T);
  }
  return groups;
}

std::vector<Patch> build_all_patches(const MeshHierarchy& h, const AssembledOperator& op,
                                     const KernelSpace& kernel, int ell, int threads) {
  std::vector<Patch> patches(h.coarse.triangle_count());
  parallel_for(h.coarse.triangle_count(), threads, [&](int T) {
    patches[T] = build_patch(h, kernel, T, ell, op.velocity, op.epsilon);
  });
  return patches;
}

}  // namespace

Eigen::SparseVector<double> element_corrector(const MeshHierarchy& h,
                                              const AssembledOperator& fine_op,
                                              int T, const FeFunction& v_coarse,
                                              const Patch& patch) {
  Eigen::SparseVector<double> out(h.fine.node_count());
  if (patch.kernel_dofs.empty()) return out;
  const FeFunction v_fine = prolongate(h, v_coarse);
  const PatchSystem system(fine_op, patch.kernel_dofs);
  const Eigen::VectorXd rhs =
      restrict_rhs(element_corrector_rhs(h, fine_op, T, v_fine.values), patch.kernel_dofs);
  const Eigen::VectorXd y = system.solve(rhs);
  out.reserve(static_cast<int>(patch.kernel_dofs.size()));
  for (int k = 0; k < y.size(); ++k) out.insert(patch.kernel_dofs[k]) = y[k];
  return out;
}

CorrectorSet build_corrector_set(const MeshHierarchy& h, const AssembledOperator& fine_op,
                                 int ell, int threads) {
  if (ell != ell_infinity && ell < 1)
    throw ConfigError("build_corrector_set: ell must be >= 1 or infinite");
  CorrectorSet set;
  set.ell = ell;
  set.coarse_nodes = h.coarse.interior_nodes();
  const int nz = static_cast<int>(set.coarse_nodes.size());
  set.correctors.assign(nz, Eigen::SparseVector<double>(h.fine.node_count()));

  const KernelSpace kernel = build_kernel_space(h);
  if (kernel.dofs.empty()) return set;  // h == H: no fine scales

  std::vector<int> z_slot(h.coarse.node_count(), -1);
  for (int k = 0; k < nz; ++k) z_slot[set.coarse_nodes[k]] = k;

  std::vector<Patch> patches = build_all_patches(h, fine_op, kernel, ell, threads);
  std::vector<PatchGroup> groups = group_patches(patches);

  // contribution of element T at local vertex a: corrector coefficients on
  // the patch dofs of T's group.
  const int nT = h.coarse.triangle_count();
  std::vector<int> group_of(nT, -1);
  for (int g = 0; g < static_cast<int>(groups.size()); ++g)
    for (const int T : groups[g].members) group_of[T] = g;
  std::vector<std::array<Eigen::VectorXd, 3>> contribution(nT);

  parallel_for(static_cast<int>(groups.size()), threads, [&](int g) {
    const PatchGroup& grp = groups[g];
    PatchSystem system(fine_op, grp.kernel_dofs);
    for (const int T : grp.members) {
      for (int a = 0; a < 3; ++a) {
        const int z = h.coarse.triangles[T][a];
        if (z_slot[z] < 0) continue;  // boundary coarse node
        const Eigen::VectorXd rhs =
            restrict_rhs(element_rhs_hat(h, fine_op, T, z), grp.kernel_dofs);
        try {
          contribution[T][a] = system.solve(rhs);
        } catch (const SolverError& e) {
          throw SolverError("corrector solve failed at coarse node " + std::to_string(z) +
                            ", element " + std::to_string(T) + ": " + e.what());
        }
      }
    }
  });

  // Deterministic merge: per node, element contributions are accumulated
  // in ascending element order.
  std::vector<std::vector<std::pair<int, int>>> per_node(nz);  // (T, a)
  for (int T = 0; T < nT; ++T)
    for (int a = 0; a < 3; ++a) {
      const int slot = z_slot[h.coarse.triangles[T][a]];
      if (slot >= 0 && contribution[T][a].size() > 0) per_node[slot].push_back({T, a});
    }
  parallel_for(nz, threads, [&](int k) {
    std::vector<std::pair<int, double>> pairs;
    for (const auto& [T, a] : per_node[k]) {
      const auto& dofs = groups[group_of[T]].kernel_dofs;
      const Eigen::VectorXd& y = contribution[T][a];
      for (int q = 0; q < y.size(); ++q) pairs.emplace_back(dofs[q], y[q]);
    }
    std::stable_sort(pairs.begin(), pairs.end(),
                     [](const auto& l, const auto& r) { return l.first < r.first; });
    auto& vec = set.correctors[k];
    vec.reserve(static_cast<int>(pairs.size()));
    for (std::size_t q = 0; q < pairs.size();) {
      double acc = 0.0;
      const int dof = pairs[q].first;
      while (q < pairs.size() && pairs[q].first == dof) acc += pairs[q++].second;
      vec.insert(dof) = acc;
    }
  });
  return set;
}

FeFunction build_corrector(const MeshHierarchy& h, const AssembledOperator& fine_op,
                           int ell, const FeFunction& v_coarse, int threads) {
  FeFunction out;
  out.mesh = &h.fine;
  out.values = Eigen::VectorXd::Zero(h.fine.node_count());
  const KernelSpace kernel = build_kernel_space(h);
  if (kernel.dofs.empty()) return out;
  const FeFunction v_fine = prolongate(h, v_coarse);

  std::vector<Patch> patches = build_all_patches(h, fine_op, kernel, ell, threads);
  std::vector<PatchGroup> groups = group_patches(patches);

  const int nT = h.coarse.triangle_count();
  std::vector<Eigen::VectorXd> contribution(nT);
  std::vector<int> group_of(nT, -1);
  for (int g = 0; g < static_cast<int>(groups.size()); ++g)
    for (const int T : groups[g].members) group_of[T] = g;

  parallel_for(static_cast<int>(groups.size()), threads, [&](int g) {
    const PatchGroup& grp = groups[g];
    PatchSystem system(fine_op, grp.kernel_dofs);
    for (const int T : grp.members) {
      const Eigen::VectorXd rhs =
          restrict_rhs(element_corrector_rhs(h, fine_op, T, v_fine.values), grp.kernel_dofs);
      contribution[T] = system.solve(rhs);
    }
  });
  for (int T = 0; T < nT; ++T) {
    if (contribution[T].size() == 0) continue;
    const auto& dofs = groups[group_of[T]].kernel_dofs;
    for (int q = 0; q < contribution[T].size(); ++q)
      out.values[dofs[q]] += contribution[T][q];
  }
  return out;
}

KernelSolver::KernelSolver(const MeshHierarchy& h, const AssembledOperator& fine_op,
                           const KernelSpace& kernel)
    : h_(&h), op_(&fine_op), system_(fine_op, kernel.dofs) {}

FeFunction KernelSolver::corrector(const Eigen::VectorXd& v_fine) const {
  // Global right-hand side r_i = a(phi_i, v) = (A^T v)_i.
  const Eigen::VectorXd r = op_->full.transpose() * v_fine;
  Eigen::VectorXd rhs(static_cast<int>(system_.dofs().size()));
  for (std::size_t k = 0; k < system_.dofs().size(); ++k) rhs[static_cast<int>(k)] = r[system_.dofs()[k]];
  const Eigen::VectorXd y = system_.solve(rhs);
  FeFunction out;
  out.mesh = &h_->fine;
  out.values = Eigen::VectorXd::Zero(h_->fine.node_count());
  for (std::size_t k = 0; k < system_.dofs().size(); ++k) out.values[system_.dofs()[k]] = y[static_cast<int>(k)];
  return out;
}

FeFunction KernelSolver::element_corrector(int T, const Eigen::VectorXd& v_fine) const {
  const Eigen::VectorXd rhs =
      restrict_rhs(element_corrector_rhs(*h_, *op_, T, v_fine), system_.dofs());
  const Eigen::VectorXd y = system_.solve(rhs);
  FeFunction out;
  out.mesh = &h_->fine;
  out.values = Eigen::VectorXd::Zero(h_->fine.node_count());
  for (std::size_t k = 0; k < system_.dofs().size(); ++k) out.values[system_.dofs()[k]] = y[static_cast<int>(k)];
  return out;
}

SparseMat CorrectorSet::test_matrix(const MeshHierarchy& h) const {
  const SparseMat P = prolongation_matrix(h);
  std::vector<Eigen::Triplet<double>> trip;
  for (int k = 0; k < static_cast<int>(coarse_nodes.size()); ++k) {
    for (SparseMat::InnerIterator it(P, coarse_nodes[k]); it; ++it)
      trip.emplace_back(static_cast<int>(it.row()), k, it.value());
    for (Eigen::SparseVector<double>::InnerIterator it(correctors[k]); it; ++it)
      trip.emplace_back(static_cast<int>(it.index()), k, -it.value());
  }
  SparseMat W(h.fine.node_count(), static_cast<int>(coarse_nodes.size()));
  W.setFromTriplets(trip.begin(), trip.end());
  return W;
}

void write_field_csv(std::ostream& out, const FeFunction& u) {
  CsvWriter csv(out);
  csv.header("node,x,y,value");
  for (int v = 0; v < u.mesh->node_count(); ++v) {
    csv.field(v).field(u.mesh->nodes[v].x).field(u.mesh->nodes[v].y).field(u.values[v]);
    csv.end_row();
  }
}

}  // namespace vmslod
