#include "doctest.h"
#include "rydagg/config.hpp"
#include "rydagg/ensemble.hpp"
#include "rydagg/units.hpp"

#include <cmath>
#include <numeric>

using namespace rydagg;

namespace {

const Couplings kLab{units::frequency_coefficient(976.0), units::frequency_coefficient(-5400.0)};

Eigen::VectorXd chain(std::vector<double> r) {
  return Eigen::Map<Eigen::VectorXd>(r.data(), static_cast<Eigen::Index>(r.size()));
}

DynamicsOptions short_run() {
  DynamicsOptions o;
  o.mass = units::mass_from_kg(1e-26);
  o.t_final = 0.1;
  o.output_stride = 0.01;
  return o;
}

}  // namespace

TEST_CASE("initial conditions have the requested moments") {
  const Eigen::VectorXd mean = chain(regular_chain(5, 5.0));
  const double mass = units::mass_from_kg(1e-26);
  const auto sampler = make_sampler(mean, 0.3, mass, 99);
  CHECK(sampler.sigma_v == doctest::Approx(1.0 / (mass * 0.3)));
  const int n = 20000;
  const auto draws = sample_initials(sampler, n);
  REQUIRE(draws.size() == static_cast<std::size_t>(n));
  for (int a = 0; a < 5; ++a) {
    double sx = 0, sxx = 0, sv = 0, svv = 0, sxv = 0;
    for (const auto& d : draws) {
      const double x = d.positions[a] - mean[a], v = d.velocities[a];
      sx += x;
      sxx += x * x;
      sv += v;
      svv += v * v;
      sxv += x * v;
    }
    const double sdx = std::sqrt(sxx / n - (sx / n) * (sx / n));
    const double sdv = std::sqrt(svv / n - (sv / n) * (sv / n));
    CHECK(std::abs(sdx / 0.3 - 1.0) < 0.03);
    CHECK(std::abs(sdv / sampler.sigma_v - 1.0) < 0.03);
    CHECK(std::abs(sx / n) < 4.0 * 0.3 / std::sqrt(n));
    CHECK(std::abs(sv / n) < 4.0 * sampler.sigma_v / std::sqrt(n));
    // Uncorrelated position and velocity.
    CHECK(std::abs(sxv / n / (sdx * sdv)) < 0.03);
  }
}

TEST_CASE("sampling is reproducible and index addressable") {
  const auto sampler = make_sampler(chain(regular_chain(4, 5.0)), 0.3, 94.8, 5);
  const auto a = sample_initials(sampler, 50);
  const auto b = sample_initials(sampler, 50);
  for (int i = 0; i < 50; ++i) {
    CHECK(a[i].positions == b[i].positions);
    CHECK(a[i].velocities == b[i].velocities);
    const auto one = sample_initial(sampler, static_cast<std::uint64_t>(i));
    CHECK(one.positions == a[i].positions);
    CHECK(one.velocities == a[i].velocities);
  }
  const auto other = sample_initials(make_sampler(sampler.mean, 0.3, 94.8, 6), 1);
  CHECK(other[0].positions != a[0].positions);
}

TEST_CASE("excitation weight") {
  const ExcitationBasis basis(5, 2);
  Eigen::VectorXcd uniform = Eigen::VectorXcd::Constant(10, 1.0 / std::sqrt(10.0));
  double total = 0.0;
  for (int a = 0; a < 5; ++a) {
    const double w = excitation_weight(uniform, basis, a);
    CHECK(w == doctest::Approx(0.4));
    total += w;
  }
  CHECK(total == doctest::Approx(2.0));
  Eigen::VectorXd pops = Eigen::VectorXd::Zero(10);
  pops[static_cast<Eigen::Index>(basis.index_of({1, 3}))] = 1.0;
  CHECK(excitation_weight(pops, basis, 1) == 1.0);
  CHECK(excitation_weight(pops, basis, 3) == 1.0);
  CHECK(excitation_weight(pops, basis, 0) == 0.0);
}

TEST_CASE("grid bins clamp to the edges") {
  const auto g = make_grid(chain(regular_chain(5, 5.0)), 0.25, 0.01, 11);
  CHECK(g.r0 == doctest::Approx(-10.0));
  CHECK(g.n_r * g.bin_width >= 40.0);
  CHECK(g.bin_of(-1e6) == 0);
  CHECK(g.bin_of(1e6) == g.n_r - 1);
  CHECK(g.bin_of(0.0) == 40);
  CHECK(g.bin_center(40) == doctest::Approx(0.125));
}

TEST_CASE("ensemble densities integrate to excitation and atom numbers") {
  const ExcitationBasis basis(5, 2);
  const HamiltonianModel model(basis, kLab);
  EnsembleOptions opts;
  opts.n_traj = 12;
  opts.seed = 4;
  const auto res =
      run_ensemble(model, short_run(), chain(dislocated_end_chain(5, 5.0, 2.5)), 8, 0.25, opts);
  const auto& obs = res.observables;
  CHECK(obs.n_traj() == 12);
  CHECK(res.aborted == 0);
  const auto& g = obs.grid();
  REQUIRE(g.n_t == 11);
  for (int t = 0; t < g.n_t; ++t) {
    double e = 0, rho = 0, atoms = 0, pops = 0, fr = 0, diab = 0, exc = 0;
    for (int r = 0; r < g.n_r; ++r) {
      e += obs.e(t, r) * g.bin_width;
      rho += obs.rho(t, r) * g.bin_width;
      for (int a = 0; a < 5; ++a) atoms += obs.atom_density(t, a, r) * g.bin_width;
    }
    for (int k = 0; k < 10; ++k) {
      pops += obs.population(t, k);
      fr += obs.fraction(t, k);
      diab += obs.diabatic_population(t, k);
    }
    for (int a = 0; a < 5; ++a) exc += obs.atom_excitation(t, a);
    CHECK(e == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(rho == doctest::Approx(5.0).epsilon(1e-9));
    CHECK(atoms == doctest::Approx(rho).epsilon(1e-12));
    CHECK(pops == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(fr == doctest::Approx(1.0));
    CHECK(diab == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(exc == doctest::Approx(2.0).epsilon(1e-8));
  }
  CHECK(obs.population(0, 8) == doctest::Approx(1.0));
  CHECK(obs.fraction(0, 8) == 1.0);
  CHECK(obs.mean_position(0, 4) == doctest::Approx(17.5).epsilon(0.05));
}

TEST_CASE("ensemble is independent of worker count and merge order") {
  const ExcitationBasis basis(4, 2);
  const HamiltonianModel model(basis, kLab);
  const Eigen::VectorXd mean = chain({0.0, 5.0, 10.0, 12.5});
  EnsembleOptions opts;
  opts.n_traj = 20;
  opts.seed = 8;
  opts.block_size = 4;
  opts.n_workers = 1;
  const auto one = run_ensemble(model, short_run(), mean, 4, 0.25, opts);
  opts.n_workers = 3;
  const auto three = run_ensemble(model, short_run(), mean, 4, 0.25, opts);
  const auto& a = one.observables;
  const auto& b = three.observables;
  for (int t = 0; t < a.grid().n_t; ++t) {
    for (int r = 0; r < a.grid().n_r; ++r) {
      CHECK(a.e(t, r) == b.e(t, r));
      CHECK(a.rho(t, r) == b.rho(t, r));
    }
    for (int k = 0; k < 6; ++k) CHECK(a.population(t, k) == b.population(t, k));
  }
  REQUIRE(one.hops.size() == three.hops.size());
  for (std::size_t i = 0; i < one.hops.size(); ++i) {
    CHECK(one.hops[i].trajectory == three.hops[i].trajectory);
    CHECK(one.hops[i].hop.t == three.hops[i].hop.t);
  }
}

TEST_CASE("merge adds trajectories and rejects mismatched grids") {
  const ExcitationBasis basis(3, 1);
  const HamiltonianModel model(basis, kLab);
  const Eigen::VectorXd r = chain({0.0, 5.0, 10.0});
  auto opts = short_run();
  const auto grid = make_grid(r, 0.25, opts.output_stride, output_frame_count(opts));
  Engine rng(1);
  const auto traj = run_trajectory(model, opts, r, Eigen::VectorXd::Zero(3), 0, rng);

  EnsembleObservables x(grid, 3, 1, 3), y(grid, 3, 1, 3), both(grid, 3, 1, 3);
  x.add_trajectory(traj, basis);
  y.add_trajectory(traj, basis);
  both.add_trajectory(traj, basis);
  both.add_trajectory(traj, basis);
  x.merge(y);
  CHECK(x.n_traj() == 2);
  for (int t = 0; t < grid.n_t; ++t)
    for (int i = 0; i < grid.n_r; ++i) CHECK(x.e(t, i) == both.e(t, i));
  // Peak densities over the whole grid.
  double e_peak = 0.0, rho_peak = 0.0;
  for (int t = 0; t < grid.n_t; ++t)
    for (int i = 0; i < grid.n_r; ++i) {
      e_peak = std::max(e_peak, x.e(t, i));
      rho_peak = std::max(rho_peak, x.rho(t, i));
    }
  CHECK(x.e0() == e_peak);
  CHECK(x.rho0() == rho_peak);
  CHECK(x.rho0() == doctest::Approx(1.0 / grid.bin_width));

  auto other = grid;
  other.n_r += 1;
  EnsembleObservables z(other, 3, 1, 3);
  CHECK_THROWS_AS(x.merge(z), std::invalid_argument);
  CHECK_THROWS_AS(x.merge(EnsembleObservables(grid, 3, 1, 2)), std::invalid_argument);
}
