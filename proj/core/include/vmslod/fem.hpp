#ifndef VMSLOD_FEM_HPP
#define VMSLOD_FEM_HPP

#include <Eigen/Sparse>
#include <functional>
#include <iosfwd>

#include "vmslod/field.hpp"
#include "vmslod/mesh.hpp"

namespace vmslod {

using SparseMat = Eigen::SparseMatrix<double>;

/// Nodal P1 coefficient vector bound to a mesh. Members of H^1_0 carry
/// exact zeros at boundary nodes.
struct FeFunction {
  const TriMesh* mesh = nullptr;
  Eigen::VectorXd values;
};

/// Assembled bilinear form with the convention entry(r, c) = a(phi_c, phi_r):
/// the column index is the trial (first) slot, the row index the test
/// (second) slot, so full * u tests a(u, .) against every basis function.
struct AssembledOperator {
  double epsilon = 1.0;
  Vec2 velocity{};
  SparseMat stiffness;   // K(r,c) = integral grad(phi_c) . grad(phi_r)
  SparseMat convection;  // C(r,c) = integral (b . grad phi_c) phi_r
  SparseMat full;        // epsilon * K + C

  int size() const { return static_cast<int>(full.rows()); }
};

/// P1 shape-function gradients (constant per triangle) and the area.
struct P1Gradients {
  std::array<Vec2, 3> grad;
  double area;
};
P1Gradients p1_gradients(const TriMesh& mesh, int t);

SparseMat assemble_stiffness(const TriMesh& mesh);
SparseMat assemble_convection(const TriMesh& mesh, Vec2 b);
AssembledOperator assemble_operator(const TriMesh& mesh, double epsilon, Vec2 b);

/// Load vector by the 3-point edge-midpoint rule, exact for f of degree <= 2.
Eigen::VectorXd assemble_load(const TriMesh& mesh, const std::function<double(double, double)>& f);
Eigen::VectorXd assemble_load(const TriMesh& mesh, const FieldSpec& f);

/// Eliminate boundary rows/columns, solve the interior system by sparse LU
/// and scatter back with exact zeros on the boundary. Throws SolverError if
/// the factorization fails or the relative interior residual exceeds tol.
FeFunction solve_dirichlet(const TriMesh& mesh, const AssembledOperator& op,
                           const Eigen::VectorXd& rhs, double tol = 1e-10);

/// Galerkin reference solution on the fine mesh of the hierarchy. Warns on
/// `warn` (if non-null) when the fine mesh does not resolve the advection,
/// i.e. h_max |b| / epsilon > 2.
FeFunction solve_reference(const MeshHierarchy& h, double epsilon, Vec2 b,
                           const FieldSpec& f, std::ostream* warn = nullptr);

/// a(u, v) evaluated on coefficients (test vector v on the left).
double bilinear_value(const AssembledOperator& op, const Eigen::VectorXd& u,
                      const Eigen::VectorXd& v);

}  // namespace vmslod

#endif
