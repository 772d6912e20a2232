#include <benchmark/benchmark.h>

#include "rydagg/config.hpp"
#include "rydagg/dynamics.hpp"
#include "rydagg/hamiltonian.hpp"
#include "rydagg/spectrum.hpp"

using namespace rydagg;

namespace {

Eigen::VectorXd chain(int n) {
  const auto r = dislocated_end_chain(n, 5.0, 2.5);
  return Eigen::Map<const Eigen::VectorXd>(r.data(), n);
}

void BM_Hamiltonian(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const HamiltonianModel model(ExcitationBasis(n, 2), AggregateConfig{}.couplings());
  const Eigen::VectorXd r = chain(n);
  for (auto _ : state) benchmark::DoNotOptimize(model.matrix(r));
}
BENCHMARK(BM_Hamiltonian)->Arg(5)->Arg(8)->Arg(12);

void BM_Diagonalize(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const HamiltonianModel model(ExcitationBasis(n, 2), AggregateConfig{}.couplings());
  const Eigen::VectorXd r = chain(n);
  const Eigen::MatrixXd h = model.matrix(r);
  for (auto _ : state) benchmark::DoNotOptimize(diagonalize(h, r));
}
BENCHMARK(BM_Diagonalize)->Arg(5)->Arg(8)->Arg(12);

void BM_TrajectoryStep(benchmark::State& state) {
  AggregateConfig cfg;
  cfg.positions_um = doubly_dislocated_chain(5, 5.0, 2.5);
  const HamiltonianModel model(ExcitationBasis(5, 2), cfg.couplings());
  auto options = cfg.dynamics();
  Engine rng(1);
  auto st = prepare_state(model, cfg.positions(), Eigen::VectorXd::Zero(5), 7);
  DynamicsDiagnostics diag;
  for (auto _ : state) {
    const Eigen::MatrixXd h0 = step_nuclear(model, options, st, diag);
    propagate_electronic(st.coeffs, h0, st.hamiltonian, options.dt, options.n_sub_electronic, diag);
    benchmark::DoNotOptimize(attempt_hop(model, options, st, rng, diag));
  }
}
BENCHMARK(BM_TrajectoryStep);

}  // namespace

BENCHMARK_MAIN();
