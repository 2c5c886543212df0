#include "vmslod/solvers.hpp"

#include <Eigen/SparseLU>
#include <cmath>

#include "vmslod/errors.hpp"

namespace vmslod {

std::string to_string(Method m) {
  switch (m) {
    case Method::reference: return "reference";
    case Method::fem: return "fem";
    case Method::supg: return "supg";
    case Method::vms: return "vms";
    case Method::ideal: return "ideal";
  }
  return "?";
}

Method method_from_string(const std::string& s) {
  if (s == "reference") return Method::reference;
  if (s == "fem") return Method::fem;
  if (s == "supg") return Method::supg;
  if (s == "vms") return Method::vms;
  if (s == "ideal") return Method::ideal;
  throw ConfigError("method: expected one of reference|fem|supg|vms|ideal, got \"" + s + "\"");
}

Vec2 MethodConfig::velocity() const { return {std::cos(b_angle), std::sin(b_angle)}; }

double MethodConfig::coarse_H() const { return std::sqrt(2.0) / coarse_n; }

double MethodConfig::peclet() const { return coarse_H() * velocity().norm() / epsilon; }

void MethodConfig::validate() const {
  if (!(epsilon > 0.0 && epsilon <= 1.0))
    throw ConfigError("epsilon: must lie in (0, 1], got " + std::to_string(epsilon));
  if (coarse_n < 1) throw ConfigError("coarse_n: must be >= 1, got " + std::to_string(coarse_n));
  if (fine_n < 1 || fine_n % coarse_n != 0)
    throw ConfigError("fine_n: must be a positive multiple of coarse_n, got fine_n=" +
                      std::to_string(fine_n) + " with coarse_n=" + std::to_string(coarse_n));
  if (ell != infinite_ell && ell < 1)
    throw ConfigError("ell: must be >= 1 or \"inf\", got " + std::to_string(ell));
  if (!(solver_tol > 0.0)) throw ConfigError("solver_tol: must be > 0");
}

bool MethodConfig::operator==(const MethodConfig& o) const {
  return epsilon == o.epsilon && b_angle == o.b_angle && coarse_n == o.coarse_n &&
         fine_n == o.fine_n && ell == o.ell && f == o.f && solver_tol == o.solver_tol &&
         method == o.method;
}

VmsSolution solve_vms(const MeshHierarchy& h, const AssembledOperator& fine_op,
                      const Eigen::VectorXd& fine_load, const MethodConfig& cfg,
                      int threads) {
  const int ell = (cfg.method == Method::ideal) ? ell_infinity : cfg.ell;
  VmsSolution sol;
  sol.correctors = build_corrector_set(h, fine_op, ell, threads);

  const SparseMat W = sol.correctors.test_matrix(h);
  const SparseMat P = prolongation_matrix(h);
  const std::vector<int>& zs = sol.correctors.coarse_nodes;
  const int nz = static_cast<int>(zs.size());

  // Trial columns: prolongated coarse hats at interior nodes.
  SparseMat Pint(h.fine.node_count(), nz);
  {
    std::vector<Eigen::Triplet<double>> trip;
    for (int k = 0; k < nz; ++k)
      for (SparseMat::InnerIterator it(P, zs[k]); it; ++it)
        trip.emplace_back(static_cast<int>(it.row()), k, it.value());
    Pint.setFromTriplets(trip.begin(), trip.end());
  }

  // G(r, c) = a(P lambda_c, w_r), all integrals on the fine mesh.
  const SparseMat AP = fine_op.full * Pint;
  SparseMat G = SparseMat(W.transpose()) * AP;
  const Eigen::VectorXd F = W.transpose() * fine_load;

  Eigen::SparseLU<SparseMat> lu;
  lu.compute(G);
  if (lu.info() != Eigen::Success)
    throw SolverError("solve_vms: coarse Petrov-Galerkin system is singular (ell likely below "
                      "the oversampling threshold): " + lu.lastErrorMessage());
  const Eigen::VectorXd u = lu.solve(F);
  const double fnorm = F.norm();
  if (fnorm > 0.0) {
    const double res = (G * u - F).norm() / fnorm;
    if (!(res <= 1e-8)) {
      // Hager-style 1-norm condition estimate from the existing factorization.
      const int n = static_cast<int>(G.rows());
      double norm_g = 0.0;
      for (int c = 0; c < G.outerSize(); ++c) {
        double col = 0.0;
        for (SparseMat::InnerIterator it(G, c); it; ++it) col += std::abs(it.value());
        norm_g = std::max(norm_g, col);
      }
      Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / n);
      double inv_norm = 0.0;
      for (int iter = 0; iter < 3; ++iter) {
        const Eigen::VectorXd y = lu.solve(x);
        inv_norm = std::max(inv_norm, y.lpNorm<1>() / x.lpNorm<1>());
        x = y.array().sign().matrix() / n;
      }
      throw SolverError("solve_vms: coarse system residual " + std::to_string(res) +
                        " is out of tolerance (condition estimate ~" +
                        std::to_string(norm_g * inv_norm) +
                        "); ell likely below the oversampling threshold");
    }
  }

  sol.u_coarse.mesh = &h.coarse;
  sol.u_coarse.values = Eigen::VectorXd::Zero(h.coarse.node_count());
  for (int k = 0; k < nz; ++k) sol.u_coarse.values[zs[k]] = u[k];
  return sol;
}

VmsSolution solve_vms(const MeshHierarchy& h, const MethodConfig& cfg, int threads) {
  cfg.validate();
  const AssembledOperator op = assemble_operator(h.fine, cfg.epsilon, cfg.velocity());
  const Eigen::VectorXd load = assemble_load(h.fine, cfg.f);
  return solve_vms(h, op, load, cfg, threads);
}

FeFunction solve_classical_coarse(const MeshHierarchy& h, const MethodConfig& cfg) {
  cfg.validate();
  const AssembledOperator op = assemble_operator(h.coarse, cfg.epsilon, cfg.velocity());
  const Eigen::VectorXd load = assemble_load(h.coarse, cfg.f);
  return solve_dirichlet(h.coarse, op, load, cfg.solver_tol);
}

double supg_delta(double H, double epsilon) {
  return H / (std::sqrt(8.0) * std::max(epsilon, H / std::sqrt(2.0)));
}

FeFunction solve_supg(const MeshHierarchy& h, const MethodConfig& cfg) {
  return solve_supg(h, cfg, supg_delta(cfg.coarse_H(), cfg.epsilon));
}

FeFunction solve_supg(const MeshHierarchy& h, const MethodConfig& cfg, double delta) {
  cfg.validate();
  const Vec2 b = cfg.velocity();
  AssembledOperator op = assemble_operator(h.coarse, cfg.epsilon, b);
  Eigen::VectorXd load = assemble_load(h.coarse, cfg.f);

  // Streamline term delta * (b.grad u, b.grad v)_T, exact for P1, and the
  // matching right-hand side delta * (f, b.grad v)_T by the midpoint rule.
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(9 * h.coarse.triangle_count());
  for (int t = 0; t < h.coarse.triangle_count(); ++t) {
    const P1Gradients e = p1_gradients(h.coarse, t);
    const auto& tri = h.coarse.triangles[t];
    std::array<double, 3> bg;
    for (int a = 0; a < 3; ++a) bg[a] = b.dot(e.grad[a]);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        trip.emplace_back(tri[r], tri[c], delta * e.area * bg[c] * bg[r]);

    const Vec2 p0 = h.coarse.nodes[tri[0]], p1 = h.coarse.nodes[tri[1]], p2 = h.coarse.nodes[tri[2]];
    const Vec2 m01 = (p0 + p1) * 0.5, m12 = (p1 + p2) * 0.5, m20 = (p2 + p0) * 0.5;
    const double favg = (cfg.f(m01.x, m01.y) + cfg.f(m12.x, m12.y) + cfg.f(m20.x, m20.y)) / 3.0;
    for (int r = 0; r < 3; ++r) load[tri[r]] += delta * e.area * favg * bg[r];
  }
  SparseMat S(h.coarse.node_count(), h.coarse.node_count());
  S.setFromTriplets(trip.begin(), trip.end());
  op.full = op.full + S;
  return solve_dirichlet(h.coarse, op, load, cfg.solver_tol);
}

int measure_overlap(const TriMesh& coarse, Vec2 b, double epsilon, int ell) {
  const double H = std::sqrt(2.0) / coarse.n;
  std::vector<int> count(coarse.triangle_count(), 0);
  for (int T = 0; T < coarse.triangle_count(); ++T) {
    const Rect region = directional_patch_region(coarse.barycenter(T), ell, b, H, epsilon);
    for (const int K : elements_intersecting(coarse, region)) ++count[K];
  }
  int best = 0;
  for (const int c : count) best = std::max(best, c);
  return best;
}

double suggested_ell(const MethodConfig& cfg, double c_ih) {
  if (!(c_ih > 0.0)) throw ConfigError("suggested_ell: c_ih must be > 0");
  const double pe = cfg.peclet();
  const double c = c_ih;
  const TriMesh coarse = build_uniform_tri_mesh(cfg.coarse_n);
  const double den = std::abs(std::log(4 * c + 3 * c * c) - std::log(1 + 4 * c + 3 * c * c));
  double ell = 1.0;
  for (int iter = 0; iter < 3; ++iter) {
    const int probe = static_cast<int>(std::ceil(ell)) + 2;
    const double overlap = measure_overlap(coarse, cfg.velocity(), cfg.epsilon, probe);
    const double c_loc = (1 + pe * c) * (1 + pe * c) * (c + 1) *
                         (1 + 2 * c + pe * c) * std::sqrt(overlap);
    const double num = 1.0 + std::abs(std::log(c)) + std::abs(std::log(c_loc)) +
                       std::abs(std::log(1 + c + pe * c * c));
    ell = num / den;
  }
  return ell;
}

}  // namespace vmslod
