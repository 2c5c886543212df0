#include "vmslod/fem.hpp"

#include <Eigen/SparseLU>
#include <cmath>
#include <ostream>
#include <vector>

#include "vmslod/errors.hpp"

namespace vmslod {

P1Gradients p1_gradients(const TriMesh& mesh, int t) {
  const auto& tri = mesh.triangles[t];
  const Vec2 p0 = mesh.nodes[tri[0]], p1 = mesh.nodes[tri[1]], p2 = mesh.nodes[tri[2]];
  const double twice_area = (p1 - p0).cross(p2 - p0);
  P1Gradients e;
  e.area = 0.5 * twice_area;
  // grad phi_i = (y_j - y_k, x_k - x_j) / (2|T|), indices cyclic.
  e.grad[0] = Vec2{p1.y - p2.y, p2.x - p1.x} * (1.0 / twice_area);
  e.grad[1] = Vec2{p2.y - p0.y, p0.x - p2.x} * (1.0 / twice_area);
  e.grad[2] = Vec2{p0.y - p1.y, p1.x - p0.x} * (1.0 / twice_area);
  return e;
}

SparseMat assemble_stiffness(const TriMesh& mesh) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(9 * mesh.triangle_count());
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const P1Gradients e = p1_gradients(mesh, t);
    const auto& tri = mesh.triangles[t];
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        trip.emplace_back(tri[r], tri[c], e.area * e.grad[c].dot(e.grad[r]));
  }
  SparseMat K(mesh.node_count(), mesh.node_count());
  K.setFromTriplets(trip.begin(), trip.end());
  return K;
}

SparseMat assemble_convection(const TriMesh& mesh, Vec2 b) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(9 * mesh.triangle_count());
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const P1Gradients e = p1_gradients(mesh, t);
    const auto& tri = mesh.triangles[t];
    for (int c = 0; c < 3; ++c) {
      // (b . grad phi_c) is constant on T and integral of phi_r over T is |T|/3.
      const double v = b.dot(e.grad[c]) * e.area / 3.0;
      for (int r = 0; r < 3; ++r) trip.emplace_back(tri[r], tri[c], v);
    }
  }
  SparseMat C(mesh.node_count(), mesh.node_count());
  C.setFromTriplets(trip.begin(), trip.end());
  return C;
}

AssembledOperator assemble_operator(const TriMesh& mesh, double epsilon, Vec2 b) {
  if (!(epsilon > 0.0)) throw ConfigError("assemble_operator: epsilon must be > 0");
  AssembledOperator op;
  op.epsilon = epsilon;
  op.velocity = b;
  op.stiffness = assemble_stiffness(mesh);
  op.convection = assemble_convection(mesh, b);
  op.full = epsilon * op.stiffness + op.convection;
  return op;
}

Eigen::VectorXd assemble_load(const TriMesh& mesh, const std::function<double(double, double)>& f) {
  Eigen::VectorXd load = Eigen::VectorXd::Zero(mesh.node_count());
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Vec2 p0 = mesh.nodes[tri[0]], p1 = mesh.nodes[tri[1]], p2 = mesh.nodes[tri[2]];
    const double area = mesh.triangle_area(t);
    const Vec2 m01 = (p0 + p1) * 0.5, m12 = (p1 + p2) * 0.5, m20 = (p2 + p0) * 0.5;
    const double f01 = f(m01.x, m01.y), f12 = f(m12.x, m12.y), f20 = f(m20.x, m20.y);
    // Edge-midpoint rule; phi_r is 1/2 at the two midpoints adjacent to r.
    load[tri[0]] += area / 3.0 * 0.5 * (f01 + f20);
    load[tri[1]] += area / 3.0 * 0.5 * (f01 + f12);
    load[tri[2]] += area / 3.0 * 0.5 * (f12 + f20);
  }
  return load;
}

Eigen::VectorXd assemble_load(const TriMesh& mesh, const FieldSpec& f) {
  return assemble_load(mesh, [&f](double x, double y) { return f(x, y); });
}

FeFunction solve_dirichlet(const TriMesh& mesh, const AssembledOperator& op,
                           const Eigen::VectorXd& rhs, double tol) {
  const std::vector<int> interior = mesh.interior_nodes();
  const int ni = static_cast<int>(interior.size());
  std::vector<int> local(mesh.node_count(), -1);
  for (int k = 0; k < ni; ++k) local[interior[k]] = k;

  SparseMat A(ni, ni);
  {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(op.full.nonZeros());
    for (int c = 0; c < op.full.outerSize(); ++c) {
      if (local[c] < 0) continue;
      for (SparseMat::InnerIterator it(op.full, c); it; ++it) {
        const int r = static_cast<int>(it.row());
        if (local[r] >= 0) trip.emplace_back(local[r], local[c], it.value());
      }
    }
    A.setFromTriplets(trip.begin(), trip.end());
  }

  Eigen::VectorXd b(ni);
  for (int k = 0; k < ni; ++k) b[k] = rhs[interior[k]];

  Eigen::SparseLU<SparseMat> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success)
    throw SolverError("solve_dirichlet: sparse LU factorization failed: " + lu.lastErrorMessage());
  Eigen::VectorXd x = lu.solve(b);

  const double bnorm = b.norm();
  if (bnorm > 0.0) {
    const double res = (A * x - b).norm() / bnorm;
    if (!(res <= tol))
      throw SolverError("solve_dirichlet: relative residual " + std::to_string(res) +
                        " exceeds tolerance " + std::to_string(tol));
  } else {
    x.setZero();
  }

  FeFunction u;
  u.mesh = &mesh;
  u.values = Eigen::VectorXd::Zero(mesh.node_count());
  for (int k = 0; k < ni; ++k) u.values[interior[k]] = x[k];
  return u;
}

FeFunction solve_reference(const MeshHierarchy& h, double epsilon, Vec2 b,
                           const FieldSpec& f, std::ostream* warn) {
  const double hmax = h.fine.mesh_size();
  if (warn && hmax * b.norm() / epsilon > 2.0)
    *warn << "warning: fine mesh does not resolve the advection (h_max*|b|/epsilon = "
          << hmax * b.norm() / epsilon << " > 2); the reference solution may be polluted\n";
  const AssembledOperator op = assemble_operator(h.fine, epsilon, b);
  const Eigen::VectorXd load = assemble_load(h.fine, f);
  return solve_dirichlet(h.fine, op, load);
}

double bilinear_value(const AssembledOperator& op, const Eigen::VectorXd& u,
                      const Eigen::VectorXd& v) {
  return v.dot(op.full * u);
}

}  // namespace vmslod
