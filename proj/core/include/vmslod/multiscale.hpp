#ifndef VMSLOD_MULTISCALE_HPP
#define VMSLOD_MULTISCALE_HPP

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <limits>
#include <memory>
#include <vector>

#include "vmslod/fem.hpp"
#include "vmslod/mesh.hpp"

namespace vmslod {

/// Patch level meaning "solve on the whole domain" (the ideal method).
inline constexpr int ell_infinity = std::numeric_limits<int>::max();

/// Explicit basis of Ker I_H: the fine interior nodes that are not images
/// of coarse nodes, in ascending order.
struct KernelSpace {
  std::vector<int> dofs;
  std::vector<int> local_of;   // fine node -> position in dofs, or -1
  std::vector<int> incidence;  // fine-node incident-triangle counts

  bool is_kernel(int fine_node) const { return local_of[fine_node] >= 0; }
  int size() const { return static_cast<int>(dofs.size()); }
};

KernelSpace build_kernel_space(const MeshHierarchy& h);

/// Geometry and fine-level degrees of freedom of one localized corrector
/// problem. kernel_dofs are the kernel nodes strictly interior to the
/// union of the patch's coarse elements, so functions spanned by them
/// vanish identically outside the patch.
struct Patch {
  int element = -1;
  int ell = 0;
  Rect region;
  std::vector<int> coarse_elements;
  std::vector<int> kernel_dofs;
};

Patch build_patch(const MeshHierarchy& h, const KernelSpace& kernel, int T,
                  int ell, Vec2 b, double epsilon);

/// Coarse nodal value transfer: (I_H v)(z) = v(coarse_to_fine_node(z)).
FeFunction nodal_interpolation(const MeshHierarchy& h, const FeFunction& fine);

/// Embedding V_H into V_h by P1 evaluation at fine nodes (exact for the
/// nested structured grids).
FeFunction prolongate(const MeshHierarchy& h, const FeFunction& coarse);

/// Sparse prolongation operator; column z holds the fine nodal values of
/// the coarse hat at z.
SparseMat prolongation_matrix(const MeshHierarchy& h);

/// Value of the coarse hat function at a fine node, matrix-free.
double coarse_hat_value(const MeshHierarchy& h, int coarse_node, int fine_node);

/// Monte-Carlo lower bound for the interpolation stability constant:
/// max over random unit-H1-seminorm interior fine functions v of
/// max(H^-1 ||v - P I_H v||_L2, |P I_H v|_H1). Sample 0 is a prolongated
/// random coarse function, which pins the estimate at >= 1.
double estimate_interp_constant(const MeshHierarchy& h, int samples, unsigned seed);

/// Factorized corrector system on a set of kernel dofs. The corrector
/// unknown sits in the second slot of the bilinear form, so the system
/// matrix is the TRANSPOSE (within the dof set) of the assembled
/// trial-first operator. With convection this is observably different from
/// the untransposed matrix; see the regression tests.
class PatchSystem {
 public:
  PatchSystem(const AssembledOperator& fine_op, std::vector<int> dofs);

  const std::vector<int>& dofs() const { return dofs_; }
  /// Solve for the corrector coefficients on the patch dofs; `rhs` is in
  /// patch-local indexing.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

 private:
  std::vector<int> dofs_;
  Eigen::SparseLU<SparseMat> lu_;
};

/// Right-hand side r_i = a_T(phi_i, v) of a corrector problem, assembled
/// over the fine children of coarse element T. Returns (fine node, value)
/// pairs covering the nodes of those children.
std::vector<std::pair<int, double>> element_corrector_rhs(
    const MeshHierarchy& h, const AssembledOperator& fine_op, int T,
    const Eigen::VectorXd& v_fine);

/// Localized element corrector C_{T,ell} v: solve on the patch kernel dofs
/// with the element-restricted right-hand side, extended by zero.
Eigen::SparseVector<double> element_corrector(const MeshHierarchy& h,
                                              const AssembledOperator& fine_op,
                                              int T, const FeFunction& v_coarse,
                                              const Patch& patch);

/// Localized correctors and test functions for every interior coarse node:
/// corrector(z) = sum over coarse elements T containing z of
/// C_{T,ell} lambda_z, and w_z = P lambda_z - corrector(z).
struct CorrectorSet {
  int ell = 1;
  std::vector<int> coarse_nodes;  // interior coarse node ids, ascending
  std::vector<Eigen::SparseVector<double>> correctors;

  /// Fine x n_test matrix whose columns are the test functions w_z.
  SparseMat test_matrix(const MeshHierarchy& h) const;
};

CorrectorSet build_corrector_set(const MeshHierarchy& h, const AssembledOperator& fine_op,
                                 int ell, int threads = 1);

/// C_ell v for a general coarse function (sum of localized element
/// correctors over all coarse elements).
FeFunction build_corrector(const MeshHierarchy& h, const AssembledOperator& fine_op,
                           int ell, const FeFunction& v_coarse, int threads = 1);

/// Global (ideal) corrector problems, factorized once on the whole kernel.
class KernelSolver {
 public:
  KernelSolver(const MeshHierarchy& h, const AssembledOperator& fine_op,
               const KernelSpace& kernel);

  /// C v from a(w, C v) = a(w, v) for all kernel w; one solve.
  FeFunction corrector(const Eigen::VectorXd& v_fine) const;
  /// C_T v from a(w, C_T v) = a_T(w, v) for all kernel w.
  FeFunction element_corrector(int T, const Eigen::VectorXd& v_fine) const;

 private:
  const MeshHierarchy* h_;
  const AssembledOperator* op_;
  PatchSystem system_;
};

/// Dump a fine function as CSV rows "node,x,y,value" (plotting interface).
void write_field_csv(std::ostream& out, const FeFunction& u);

}  // namespace vmslod

#endif
