#include "vmslod/driver.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <ostream>
#include <vector>

#include "vmslod/analysis.hpp"
#include "vmslod/csv.hpp"
#include "vmslod/errors.hpp"

namespace vmslod {

namespace {

std::ofstream open_output(const std::filesystem::path& dir, const std::string& name,
                          std::vector<std::string>& files) {
  std::ofstream out(dir / name, std::ios::binary);  // binary: keep LF on every platform
  if (!out) throw ConfigError("output_dir: cannot write to " + (dir / name).string());
  files.push_back(name);
  return out;
}

std::vector<int> sweep_coarse_ns(const RunSpec& spec) {
  std::vector<int> out;
  for (const int cn : {8, 16, 32, 64})
    if (cn <= spec.cfg.fine_n && spec.cfg.fine_n % cn == 0) out.push_back(cn);
  if (out.empty()) out.push_back(spec.cfg.coarse_n);
  return out;
}

void warn_peclet(const RunSpec& spec, std::ostream& log) {
  const double bnorm = spec.cfg.velocity().norm();
  const int n = (spec.cfg.method == Method::reference) ? spec.cfg.fine_n : spec.cfg.coarse_n;
  const double hmax = std::sqrt(2.0) / n;
  if (hmax * bnorm / spec.cfg.epsilon > 2.0)
    log << "warning: mesh Peclet condition violated on the solve mesh (h_max*|b|/epsilon = "
        << hmax * bnorm / spec.cfg.epsilon << " > 2); expect layer artifacts\n";
}

int central_element(const TriMesh& mesh) {
  int best = 0;
  double dist = std::numeric_limits<double>::max();
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const Vec2 d = mesh.barycenter(t) - Vec2{0.5, 0.5};
    const double r = d.norm();
    if (r < dist - 1e-15) {
      dist = r;
      best = t;
    }
  }
  return best;
}

int central_interior_vertex(const TriMesh& mesh, int element) {
  int best = -1;
  double dist = std::numeric_limits<double>::max();
  for (const int z : mesh.triangles[element]) {
    if (mesh.boundary_node[z]) continue;
    const double r = (mesh.nodes[z] - Vec2{0.5, 0.5}).norm();
    if (r < dist - 1e-15) {
      dist = r;
      best = z;
    }
  }
  if (best < 0) throw ConfigError("decay/correctors: the central coarse element has no interior vertex; refine coarse_n");
  return best;
}

void cmd_solve(const RunSpec& spec, std::ostream& log, std::vector<std::string>& files) {
  const MeshHierarchy h = build_hierarchy(spec.cfg.coarse_n, spec.cfg.fine_n);
  warn_peclet(spec, log);
  FeFunction u;
  switch (spec.cfg.method) {
    case Method::reference:
      u = solve_reference(h, spec.cfg.epsilon, spec.cfg.velocity(), spec.cfg.f, &log);
      break;
    case Method::fem:
      u = solve_classical_coarse(h, spec.cfg);
      break;
    case Method::supg:
      u = solve_supg(h, spec.cfg);
      break;
    case Method::vms:
    case Method::ideal:
      u = solve_vms(h, spec.cfg, spec.threads).u_coarse;
      break;
  }
  auto out = open_output(spec.output_dir, "field.csv", files);
  write_field_csv(out, u);
}

void cmd_table(const RunSpec& spec, std::ostream& log, std::vector<std::string>& files,
               bool table1) {
  MethodConfig tmpl = spec.cfg;
  tmpl.method = Method::vms;
  std::vector<int> ells;
  for (int l = 1; l <= 6; ++l) ells.push_back(l);
  const ConvergenceResult res =
      convergence_study(tmpl, sweep_coarse_ns(spec), ells, spec.threads, &log);
  auto out = open_output(spec.output_dir, table1 ? "table1.csv" : "table2.csv", files);
  CsvWriter csv(out);
  csv.header(table1 ? "H,ell,h1_local_err" : "H,ell,l2_global_err");
  for (const auto& row : res.rows) {
    csv.field(row.H).field(row.ell).field(table1 ? row.h1_local : row.l2_global);
    csv.end_row();
  }
}

void cmd_convergence(const RunSpec& spec, std::ostream& log, std::vector<std::string>& files,
                     nlohmann::json& manifest) {
  MethodConfig tmpl = spec.cfg;
  tmpl.method = Method::vms;
  const ConvergenceResult res =
      convergence_study(tmpl, sweep_coarse_ns(spec), {spec.cfg.ell}, spec.threads, &log);
  auto out = open_output(spec.output_dir, "convergence.csv", files);
  CsvWriter csv(out);
  csv.header("H,ell,h1_local_err,l2_global_err,l2_interp_err");
  for (const auto& row : res.rows) {
    csv.field(row.H).field(row.ell).field(row.h1_local).field(row.l2_global).field(row.l2_interp);
    csv.end_row();
  }
  manifest["slopes"] = {{"h1_local", res.slope_h1_local},
                        {"l2_global", res.slope_l2_global},
                        {"l2_global_last3", res.slope_l2_last3}};
  log << "slopes: h1_local=" << res.slope_h1_local << " l2_global=" << res.slope_l2_global
      << " l2_global_last3=" << res.slope_l2_last3 << "\n";
}

void cmd_decay(const RunSpec& spec, std::ostream& log, std::vector<std::string>& files) {
  const MeshHierarchy h = build_hierarchy(spec.cfg.coarse_n, spec.cfg.fine_n);
  const int T = central_element(h.coarse);
  const int z = central_interior_vertex(h.coarse, T);
  FeFunction hat;
  hat.mesh = &h.coarse;
  hat.values = Eigen::VectorXd::Zero(h.coarse.node_count());
  hat.values[z] = 1.0;
  const int ell_max =
      (spec.cfg.ell == MethodConfig::infinite_ell || spec.cfg.ell < 2) ? 6 : spec.cfg.ell;
  log << "decay: element " << T << ", hat node " << z << ", ell = 1.." << ell_max << "\n";
  const auto profile = decay_profile(h, spec.cfg, T, hat, ell_max);
  auto out = open_output(spec.output_dir, "decay.csv", files);
  CsvWriter csv(out);
  csv.header("ell,seminorm_outside");
  for (const auto& [ell, value] : profile) {
    csv.field(ell).field(value);
    csv.end_row();
  }
}

void cmd_compare(const RunSpec& spec, std::ostream& log, std::vector<std::string>& files) {
  const MeshHierarchy h = build_hierarchy(spec.cfg.coarse_n, spec.cfg.fine_n);
  const FeFunction u_ref = solve_reference(h, spec.cfg.epsilon, spec.cfg.velocity(), spec.cfg.f, &log);
  MethodConfig cfg = spec.cfg;
  cfg.method = Method::fem;
  const FeFunction u_fem = prolongate(h, solve_classical_coarse(h, cfg));
  cfg.method = Method::supg;
  const FeFunction u_supg = prolongate(h, solve_supg(h, cfg));
  cfg.method = Method::vms;
  const FeFunction u_vms = prolongate(h, solve_vms(h, cfg, spec.threads).u_coarse);

  const auto ref = line_cut(u_ref, 0.75);
  const auto fem = line_cut(u_fem, 0.75);
  const auto supg = line_cut(u_supg, 0.75);
  const auto vms = line_cut(u_vms, 0.75);
  auto out = open_output(spec.output_dir, "linecut.csv", files);
  CsvWriter csv(out);
  csv.header("x,u_ref,u_fem,u_supg,u_vms");
  for (std::size_t i = 0; i < ref.size(); ++i) {
    csv.field(ref[i].first).field(ref[i].second).field(fem[i].second).field(supg[i].second)
        .field(vms[i].second);
    csv.end_row();
  }
}

void cmd_correctors(const RunSpec& spec, std::ostream& log, std::vector<std::string>& files) {
  const MeshHierarchy h = build_hierarchy(spec.cfg.coarse_n, spec.cfg.fine_n);
  const AssembledOperator op = assemble_operator(h.fine, spec.cfg.epsilon, spec.cfg.velocity());
  const CorrectorSet set = build_corrector_set(h, op, spec.cfg.ell, spec.threads);
  const int T = central_element(h.coarse);
  const int z = central_interior_vertex(h.coarse, T);
  const auto it = std::find(set.coarse_nodes.begin(), set.coarse_nodes.end(), z);
  const int k = static_cast<int>(it - set.coarse_nodes.begin());
  log << "correctors: dumping node " << z << " at ell = " << ell_to_string(spec.cfg.ell) << "\n";

  FeFunction corr;
  corr.mesh = &h.fine;
  corr.values = Eigen::VectorXd(set.correctors[k]);
  FeFunction hat;
  hat.mesh = &h.coarse;
  hat.values = Eigen::VectorXd::Zero(h.coarse.node_count());
  hat.values[z] = 1.0;
  FeFunction test;
  test.mesh = &h.fine;
  test.values = prolongate(h, hat).values - corr.values;

  auto out1 = open_output(spec.output_dir, "corrector.csv", files);
  write_field_csv(out1, corr);
  auto out2 = open_output(spec.output_dir, "testfn.csv", files);
  write_field_csv(out2, test);
}

}  // namespace

void run(const RunSpec& spec, std::ostream& log) {
  spec.validate();
  const auto t0 = std::chrono::steady_clock::now();
  std::filesystem::create_directories(spec.output_dir);
  std::vector<std::string> files;
  nlohmann::json manifest;

  switch (spec.command) {
    case Command::solve: cmd_solve(spec, log, files); break;
    case Command::table1: cmd_table(spec, log, files, true); break;
    case Command::table2: cmd_table(spec, log, files, false); break;
    case Command::decay: cmd_decay(spec, log, files); break;
    case Command::convergence: cmd_convergence(spec, log, files, manifest); break;
    case Command::compare: cmd_compare(spec, log, files); break;
    case Command::correctors: cmd_correctors(spec, log, files); break;
  }

  manifest["config"] = spec.to_json();
  manifest["command"] = to_string(spec.command);
  manifest["versions"] = {{"vmslod", VMSLOD_VERSION},
                          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                        std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                        std::to_string(EIGEN_MINOR_VERSION)}};
  manifest["wall_time_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  files.push_back("manifest.json");
  manifest["files"] = files;

  std::ofstream out(spec.output_dir / "manifest.json", std::ios::binary);
  if (!out) throw ConfigError("output_dir: cannot write manifest.json");
  out << manifest.dump(2) << "\n";
  log << "wrote " << files.size() << " file(s) to " << spec.output_dir.string() << "\n";
}

}  // namespace vmslod
