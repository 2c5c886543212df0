#include "vmslod/analysis.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>

#include "vmslod/errors.hpp"

namespace vmslod {

namespace {

bool box_contains_element(const TriMesh& mesh, int t, const Box& box) {
  constexpr double tol = 1e-12;
  for (const int v : mesh.triangles[t]) {
    const Vec2 p = mesh.nodes[v];
    if (p.x < box.x0 - tol || p.x > box.x1 + tol || p.y < box.y0 - tol || p.y > box.y1 + tol)
      return false;
  }
  return true;
}

}  // namespace

std::vector<int> elements_in_box(const TriMesh& mesh, const Box& box) {
  std::vector<int> out;
  for (int t = 0; t < mesh.triangle_count(); ++t)
    if (box_contains_element(mesh, t, box)) out.push_back(t);
  return out;
}

double h1_seminorm(const FeFunction& v, const std::optional<Box>& region) {
  const TriMesh& mesh = *v.mesh;
  double acc = 0.0;
  bool any = false;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    if (region && !box_contains_element(mesh, t, *region)) continue;
    any = true;
    const P1Gradients e = p1_gradients(mesh, t);
    const auto& tri = mesh.triangles[t];
    const Vec2 g = e.grad[0] * v.values[tri[0]] + e.grad[1] * v.values[tri[1]] +
                   e.grad[2] * v.values[tri[2]];
    acc += e.area * g.dot(g);
  }
  if (region && !any) return 0.0;  // empty selection
  return std::sqrt(acc);
}

double l2_norm(const FeFunction& v, const std::optional<Box>& region) {
  static const double local[3][3] = {{2, 1, 1}, {1, 2, 1}, {1, 1, 2}};
  const TriMesh& mesh = *v.mesh;
  double acc = 0.0;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    if (region && !box_contains_element(mesh, t, *region)) continue;
    const double s = mesh.triangle_area(t) / 12.0;
    const auto& tri = mesh.triangles[t];
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        acc += s * local[r][c] * v.values[tri[r]] * v.values[tri[c]];
  }
  return std::sqrt(acc);
}

std::vector<std::pair<int, double>> decay_profile_of_corrector(
    const MeshHierarchy& h, const MethodConfig& cfg, int T,
    const FeFunction& corrector_T, int ell_max) {
  const double H = cfg.coarse_H();
  const Vec2 b = cfg.velocity();
  const Vec2 mid = h.coarse.barycenter(T);

  std::vector<std::pair<int, double>> profile;
  for (int ell = 1; ell <= ell_max; ++ell) {
    const Rect region = directional_patch_region(mid, ell, b, H, cfg.epsilon);
    double acc = 0.0;
    for (int t = 0; t < h.fine.triangle_count(); ++t) {
      if (point_in_convex_polygon(region.clipped, h.fine.barycenter(t))) continue;
      const P1Gradients e = p1_gradients(h.fine, t);
      const auto& tri = h.fine.triangles[t];
      const Vec2 g = e.grad[0] * corrector_T.values[tri[0]] +
                     e.grad[1] * corrector_T.values[tri[1]] +
                     e.grad[2] * corrector_T.values[tri[2]];
      acc += e.area * g.dot(g);
    }
    profile.emplace_back(ell, std::sqrt(acc));
  }
  return profile;
}

std::vector<std::pair<int, double>> decay_profile(const MeshHierarchy& h,
                                                  const MethodConfig& cfg, int T,
                                                  const FeFunction& v_coarse,
                                                  int ell_max) {
  const AssembledOperator op = assemble_operator(h.fine, cfg.epsilon, cfg.velocity());
  const KernelSpace kernel = build_kernel_space(h);
  const KernelSolver global(h, op, kernel);
  const FeFunction v_fine = prolongate(h, v_coarse);
  const FeFunction corr = global.element_corrector(T, v_fine.values);
  return decay_profile_of_corrector(h, cfg, T, corr, ell_max);
}

FeFunction interior_ones(const TriMesh& coarse) {
  FeFunction v;
  v.mesh = &coarse;
  v.values = Eigen::VectorXd::Zero(coarse.node_count());
  for (const int z : coarse.interior_nodes()) v.values[z] = 1.0;
  return v;
}

double localization_error(const MeshHierarchy& h, const AssembledOperator& fine_op,
                          int ell, const FeFunction& v_coarse,
                          const FeFunction& global_corr, int threads) {
  const FeFunction local = build_corrector(h, fine_op, ell, v_coarse, threads);
  FeFunction diff;
  diff.mesh = &h.fine;
  diff.values = global_corr.values - local.values;
  return h1_seminorm(diff);
}

double localization_error(const MeshHierarchy& h, const MethodConfig& cfg, int ell,
                          int threads) {
  const AssembledOperator op = assemble_operator(h.fine, cfg.epsilon, cfg.velocity());
  const KernelSpace kernel = build_kernel_space(h);
  const FeFunction v = interior_ones(h.coarse);
  const FeFunction v_fine = prolongate(h, v);
  const KernelSolver global(h, op, kernel);
  const FeFunction corr = global.corrector(v_fine.values);
  return localization_error(h, op, ell, v, corr, threads);
}

double fit_slope(const std::vector<double>& H, const std::vector<double>& err) {
  if (H.size() != err.size() || H.size() < 2)
    throw ConfigError("fit_slope: need at least two (H, err) pairs");
  const int n = static_cast<int>(H.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const double x = std::log(H[i]);
    const double y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ConvergenceResult convergence_study(const MethodConfig& tmpl,
                                    const std::vector<int>& coarse_ns,
                                    const std::vector<int>& ells, int threads,
                                    std::ostream* log) {
  ConvergenceResult result;
  const TriMesh fine = build_uniform_tri_mesh(tmpl.fine_n);
  const AssembledOperator op = assemble_operator(fine, tmpl.epsilon, tmpl.velocity());
  const Eigen::VectorXd load = assemble_load(fine, tmpl.f);
  const FeFunction u_ref = solve_dirichlet(fine, op, load, tmpl.solver_tol);
  const Box omega_r{0.0, 0.0, 0.75, 0.75};

  for (const int cn : coarse_ns) {
    MethodConfig cfg = tmpl;
    cfg.coarse_n = cn;
    const MeshHierarchy h = build_hierarchy(cn, tmpl.fine_n);

    FeFunction interp_err;
    interp_err.mesh = &h.fine;
    {
      FeFunction uh_on_fine{&h.fine, u_ref.values};
      const FeFunction pi = prolongate(h, nodal_interpolation(h, uh_on_fine));
      interp_err.values = u_ref.values - pi.values;
    }
    const double l2_interp = l2_norm(interp_err);

    for (const int ell : ells) {
      cfg.ell = ell;
      ErrorReport row;
      row.H = cfg.coarse_H();
      row.ell = ell;
      row.l2_interp = l2_interp;
      const auto t0 = std::chrono::steady_clock::now();
      try {
        const VmsSolution sol = solve_vms(h, op, load, cfg, threads);
        FeFunction err;
        err.mesh = &h.fine;
        err.values = u_ref.values - prolongate(h, sol.u_coarse).values;
        row.h1_local = h1_seminorm(err, omega_r);
        row.l2_global = l2_norm(err);
      } catch (const SolverError& e) {
        if (log) *log << "convergence_study: skipping coarse_n=" << cn << " ell=" << ell
                      << ": " << e.what() << "\n";
        continue;
      }
      row.runtime_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      result.rows.push_back(row);
      if (log) *log << "convergence_study: H=" << row.H << " ell=" << ell
                    << " h1_local=" << row.h1_local << " l2=" << row.l2_global
                    << " (" << row.runtime_seconds << "s)\n";
    }
  }

  // Slopes over the distinct H values (first ell per H).
  std::vector<double> Hs, e_h1, e_l2;
  for (const auto& r : result.rows) {
    if (!Hs.empty() && Hs.back() == r.H) continue;
    Hs.push_back(r.H);
    e_h1.push_back(r.h1_local);
    e_l2.push_back(r.l2_global);
  }
  if (Hs.size() >= 2) {
    result.slope_h1_local = fit_slope(Hs, e_h1);
    result.slope_l2_global = fit_slope(Hs, e_l2);
    if (Hs.size() >= 3) {
      const std::size_t n = Hs.size();
      const std::vector<double> h3(Hs.end() - 3, Hs.end());
      const std::vector<double> e3(e_l2.end() - 3, e_l2.end());
      result.slope_l2_last3 = fit_slope(h3, e3);
      (void)n;
    }
  }
  return result;
}

std::vector<std::pair<double, double>> line_cut(const FeFunction& v, double y) {
  const TriMesh& mesh = *v.mesh;
  const double jr = y * mesh.n;
  const int j = static_cast<int>(std::lround(jr));
  if (std::abs(jr - j) > 1e-9 || j < 0 || j > mesh.n) {
    const int below = std::clamp(static_cast<int>(std::floor(jr)), 0, mesh.n);
    const int above = std::clamp(below + 1, 0, mesh.n);
    throw ConfigError("line_cut: y=" + std::to_string(y) +
                      " is not a grid line; nearest valid values are " +
                      std::to_string(static_cast<double>(below) / mesh.n) + " and " +
                      std::to_string(static_cast<double>(above) / mesh.n));
  }
  std::vector<std::pair<double, double>> out;
  out.reserve(mesh.n + 1);
  for (int i = 0; i <= mesh.n; ++i) {
    const int node = mesh.node_index(i, j);
    out.emplace_back(mesh.nodes[node].x, v.values[node]);
  }
  return out;
}

}  // namespace vmslod
