#include "rydagg/selfcheck.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "rydagg/config.hpp"
#include "rydagg/dynamics.hpp"
#include "rydagg/hamiltonian.hpp"
#include "rydagg/spectrum.hpp"
#include "rydagg/units.hpp"

namespace rydagg {

namespace {

Couplings lab_couplings() {
  return {units::frequency_coefficient(976.0), units::frequency_coefficient(-5400.0)};
}

Eigen::VectorXd random_chain(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> gap(2.5, 7.0);
  Eigen::VectorXd r(n);
  r[0] = 0.0;
  for (int i = 1; i < n; ++i) r[i] = r[i - 1] + gap(rng);
  return r;
}

std::string sci(double x) {
  std::ostringstream s;
  s.precision(3);
  s << std::scientific << x;
  return s.str();
}

CheckResult check_forces(std::mt19937_64& rng) {
  const HamiltonianModel model(ExcitationBasis(5, 2), lab_couplings());
  const double h = 1e-6;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd r = random_chain(rng, 5);
    const ExcitonSpectrum s = diagonalize(model.matrix(r), r);
    for (int k = 0; k < s.size(); ++k) {
      const Eigen::VectorXd f = surface_force(model, s, k);
      for (int a = 0; a < 5; ++a) {
        Eigen::VectorXd rp = r, rm = r;
        rp[a] += h;
        rm[a] -= h;
        const double fd = -(diagonalize(model.matrix(rp)).energies[k] -
                            diagonalize(model.matrix(rm)).energies[k]) / (2 * h);
        worst = std::max(worst, std::abs(f[a] - fd) / std::max(1.0, std::abs(fd)));
      }
    }
  }
  return {"hellmann-feynman forces vs finite differences", worst < 1e-5, "max rel err " + sci(worst)};
}

CheckResult check_couplings(std::mt19937_64& rng) {
  const HamiltonianModel model(ExcitationBasis(3, 1), lab_couplings());
  const double h = 1e-6;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd r = random_chain(rng, 3);
    const ExcitonSpectrum s = diagonalize(model.matrix(r), r);
    for (int a = 0; a < 3; ++a) {
      Eigen::VectorXd rp = r, rm = r;
      rp[a] += h;
      rm[a] -= h;
      const auto sp = align_gauge(diagonalize(model.matrix(rp), rp), s).spectrum;
      const auto sm = align_gauge(diagonalize(model.matrix(rm), rm), s).spectrum;
      for (int k = 0; k < 3; ++k) {
        for (int i = 0; i < 3; ++i) {
          if (i == k) continue;
          const double analytic = nonadiabatic_coupling(model, s, k, i)[a];
          const double fd = s.vector(k).dot(sp.vector(i) - sm.vector(i)) / (2 * h);
          worst = std::max(worst, std::abs(analytic - fd) / std::max(1.0, std::abs(fd)));
        }
      }
    }
  }
  return {"non-adiabatic couplings vs finite differences", worst < 1e-4, "max rel err " + sci(worst)};
}

CheckResult check_dimer_spectrum() {
  const Couplings c = lab_couplings();
  const HamiltonianModel model(ExcitationBasis(2, 1), c);
  Eigen::VectorXd r(2);
  r << 0.0, 5.0;
  const ExcitonSpectrum s = diagonalize(model.matrix(r), r);
  const double v = c.c3 / 125.0;
  const double diag = -c.c6 / std::pow(5.0, 6);
  const double err = std::max(std::abs(s.energies[0] - (diag - v)), std::abs(s.energies[1] - (diag + v)));
  return {"dimer energies diag -/+ C3/d^3", err < 1e-10 * v, "abs err " + sci(err)};
}

CheckResult check_rabi() {
  const Couplings c = lab_couplings();
  const HamiltonianModel model(ExcitationBasis(2, 1), c);
  Eigen::VectorXd r(2);
  r << 0.0, 5.0;
  const Eigen::MatrixXd h = model.matrix(r);
  const double v = c.c3 / 125.0;
  // Full transfer |sp> -> |ps> after half a period, pi/(2V).
  const double t_half = std::numbers::pi / (2.0 * v);
  const int steps = 2000;
  Eigen::VectorXcd coeffs(2);
  coeffs << 1.0, 0.0;
  DynamicsDiagnostics diag;
  propagate_electronic(coeffs, h, h, t_half, steps, diag);
  const double err = std::abs(std::norm(coeffs[1]) - 1.0);
  return {"frozen dimer Rabi transfer", err < 1e-8, "|1 - P(ps)| " + sci(err)};
}

CheckResult check_energy_drift() {
  AggregateConfig cfg;
  cfg.n_atoms = 2;
  cfg.n_excitations = 1;
  cfg.positions_um = {0.0, 5.0};
  const HamiltonianModel model(ExcitationBasis(2, 1), cfg.couplings());
  DynamicsOptions o = cfg.dynamics();
  o.t_final = 1.0;
  o.output_stride = 0.1;
  o.mode = Mode::fixed_surface;
  Engine rng(1);
  const auto result = run_trajectory(model, o, cfg.positions(), Eigen::VectorXd::Zero(2), 1, rng);
  const bool ok = !result.aborted && result.diagnostics.max_energy_drift < 1e-3;
  return {"repulsive dimer energy drift over 1 us", ok,
          "max rel drift " + sci(result.diagnostics.max_energy_drift)};
}

}  // namespace

std::vector<CheckResult> run_self_checks(unsigned seed) {
  std::mt19937_64 rng(seed);
  std::vector<CheckResult> out;
  out.push_back(check_dimer_spectrum());
  out.push_back(check_forces(rng));
  out.push_back(check_couplings(rng));
  out.push_back(check_rabi());
  out.push_back(check_energy_drift());
  return out;
}

}  // namespace rydagg
