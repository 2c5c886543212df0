#ifndef VMSLOD_SOLVERS_HPP
#define VMSLOD_SOLVERS_HPP

#include <string>

#include "vmslod/field.hpp"
#include "vmslod/multiscale.hpp"

namespace vmslod {

enum class Method { reference, fem, supg, vms, ideal };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

struct MethodConfig {
  double epsilon = 1.0;   // singular perturbation, in (0, 1]
  double b_angle = 0.0;   // velocity angle in radians, b = (cos, sin)
  int coarse_n = 8;
  int fine_n = 8;
  int ell = 1;            // patch level, or ell_infinity
  FieldSpec f{};          // volume force
  double solver_tol = 1e-10;
  Method method = Method::vms;

  static constexpr int infinite_ell = ell_infinity;

  Vec2 velocity() const;
  double coarse_H() const;  // sqrt(2)/coarse_n, the coarse longest edge
  double peclet() const;    // H |b| / epsilon
  void validate() const;    // throws ConfigError naming the offending field

  bool operator==(const MethodConfig& o) const;
};

/// Coarse solution of the localized Petrov-Galerkin method together with
/// the corrector set that defines its test space. ell = infinite_ell runs
/// the ideal method (whose solution is the nodal interpolant of the
/// reference solution).
struct VmsSolution {
  FeFunction u_coarse;
  CorrectorSet correctors;
};

VmsSolution solve_vms(const MeshHierarchy& h, const AssembledOperator& fine_op,
                      const Eigen::VectorXd& fine_load, const MethodConfig& cfg,
                      int threads = 1);
VmsSolution solve_vms(const MeshHierarchy& h, const MethodConfig& cfg, int threads = 1);

/// Plain Galerkin on the coarse mesh.
FeFunction solve_classical_coarse(const MeshHierarchy& h, const MethodConfig& cfg);

/// Streamline-upwind Petrov-Galerkin on the coarse mesh with
/// delta = H / (sqrt(8) max(epsilon, H/sqrt(2))). The explicit-delta
/// overload exists for diagnostics; delta = 0 degenerates to the classical
/// Galerkin method.
FeFunction solve_supg(const MeshHierarchy& h, const MethodConfig& cfg);
FeFunction solve_supg(const MeshHierarchy& h, const MethodConfig& cfg, double delta);
double supg_delta(double H, double epsilon);

/// Maximum number of patches containing a fixed coarse element (brute
/// force over all element pairs).
int measure_overlap(const TriMesh& coarse, Vec2 b, double epsilon, int ell);

/// Heuristic lower bound on the oversampling level: the stability
/// condition evaluated with all hidden constants set to one and the
/// overlap constant measured, iterated three times starting from ell = 1.
/// Expected to be conservative; the experiments get by with ell = 1.
double suggested_ell(const MethodConfig& cfg, double c_ih);

}  // namespace vmslod

#endif
