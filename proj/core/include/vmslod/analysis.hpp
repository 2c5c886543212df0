#ifndef VMSLOD_ANALYSIS_HPP
#define VMSLOD_ANALYSIS_HPP

#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "vmslod/solvers.hpp"

namespace vmslod {

/// Closed axis-aligned box; norms restricted to a box integrate over the
/// elements fully contained in it.
struct Box {
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;
};

double h1_seminorm(const FeFunction& v, const std::optional<Box>& region = std::nullopt);
double l2_norm(const FeFunction& v, const std::optional<Box>& region = std::nullopt);

/// Element indices fully contained in the closed box.
std::vector<int> elements_in_box(const TriMesh& mesh, const Box& box);

/// Seminorm of the global element corrector C_T v_H outside the shrinking
/// regions S_{T,ell,b}, for ell = 1..ell_max. Elements cut by the region
/// boundary are assigned by barycenter. The global corrector is computed
/// once (the ell = infinity problem).
std::vector<std::pair<int, double>> decay_profile(const MeshHierarchy& h,
                                                  const MethodConfig& cfg, int T,
                                                  const FeFunction& v_coarse,
                                                  int ell_max);
std::vector<std::pair<int, double>> decay_profile_of_corrector(
    const MeshHierarchy& h, const MethodConfig& cfg, int T,
    const FeFunction& corrector_T, int ell_max);

/// |C v - C_ell v|_H1 for a coarse function v (default: every interior
/// coarse coefficient 1). The overload taking the precomputed global
/// corrector avoids refactorizing the ell = infinity system per call.
double localization_error(const MeshHierarchy& h, const MethodConfig& cfg, int ell,
                          int threads = 1);
double localization_error(const MeshHierarchy& h, const AssembledOperator& fine_op,
                          int ell, const FeFunction& v_coarse,
                          const FeFunction& global_corr, int threads = 1);

/// Coarse function with coefficient 1 at every interior node.
FeFunction interior_ones(const TriMesh& coarse);

struct ErrorReport {
  double H = 0.0;
  int ell = 0;
  double h1_local = 0.0;  // seminorm of u_h - P u_{H,ell} on [0, 0.75]^2
  double l2_global = 0.0;
  double l2_interp = 0.0;  // ||u_h - P I_H u_h||_L2
  double runtime_seconds = 0.0;
};

struct ConvergenceResult {
  std::vector<ErrorReport> rows;
  double slope_h1_local = 0.0;   // least-squares fit over all H
  double slope_l2_global = 0.0;  // least-squares fit over all H
  double slope_l2_last3 = 0.0;   // fit over the three smallest H
};

/// Reference solve once per fine mesh, then one VMS solve per (H, ell).
/// Failed runs are skipped with a note on `log`.
ConvergenceResult convergence_study(const MethodConfig& tmpl,
                                    const std::vector<int>& coarse_ns,
                                    const std::vector<int>& ells, int threads = 1,
                                    std::ostream* log = nullptr);

/// Least-squares slope of log(err) against log(H).
double fit_slope(const std::vector<double>& H, const std::vector<double>& err);

/// Nodal values along the horizontal grid line at height y, ascending x.
/// y must coincide with a fine grid line.
std::vector<std::pair<double, double>> line_cut(const FeFunction& v, double y);

}  // namespace vmslod

#endif
