#include <benchmark/benchmark.h>

#include "vmslod/analysis.hpp"

namespace {

using namespace vmslod;

MethodConfig small_config() {
  MethodConfig cfg;
  cfg.epsilon = 1.0 / 32;
  cfg.b_angle = 0.7;
  cfg.coarse_n = 8;
  cfg.fine_n = 64;
  cfg.ell = 1;
  return cfg;
}

void BM_AssembleFineOperator(benchmark::State& state) {
  const TriMesh mesh = build_uniform_tri_mesh(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(assemble_operator(mesh, 1.0 / 128, {0.76484, 0.64422}));
  }
}
BENCHMARK(BM_AssembleFineOperator)->Arg(64)->Arg(128)->Arg(256);

void BM_ReferenceSolve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const TriMesh mesh = build_uniform_tri_mesh(n);
  const AssembledOperator op = assemble_operator(mesh, 1.0 / 128, {0.76484, 0.64422});
  const Eigen::VectorXd load = assemble_load(mesh, FieldSpec::parse("one"));
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_dirichlet(mesh, op, load));
  }
}
BENCHMARK(BM_ReferenceSolve)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_CorrectorSet(benchmark::State& state) {
  const MethodConfig cfg = small_config();
  const MeshHierarchy h = build_hierarchy(cfg.coarse_n, cfg.fine_n);
  const AssembledOperator op = assemble_operator(h.fine, cfg.epsilon, cfg.velocity());
  const int ell = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_corrector_set(h, op, ell, 1));
  }
}
BENCHMARK(BM_CorrectorSet)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_VmsSolve(benchmark::State& state) {
  const MethodConfig cfg = small_config();
  const MeshHierarchy h = build_hierarchy(cfg.coarse_n, cfg.fine_n);
  const AssembledOperator op = assemble_operator(h.fine, cfg.epsilon, cfg.velocity());
  const Eigen::VectorXd load = assemble_load(h.fine, cfg.f);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_vms(h, op, load, cfg, 1));
  }
}
BENCHMARK(BM_VmsSolve)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
