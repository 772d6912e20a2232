#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "../oracles.hpp"
#include "rydagg/config.hpp"
#include "rydagg/decomposition.hpp"
#include "rydagg/dynamics.hpp"
#include "rydagg/ensemble.hpp"
#include "rydagg/hamiltonian.hpp"
#include "rydagg/report.hpp"
#include "rydagg/scenario.hpp"
#include "rydagg/spectrum.hpp"

using namespace rydagg;
namespace fs = std::filesystem;

namespace {

struct Settings {
  int n_traj = 2000;
  int workers = 0;
  std::string only;
};

struct Verdict {
  bool pass = false;
  std::string detail;
};

class Clock {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double x, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << x;
  return s.str();
}

std::string mark(bool ok) { return ok ? "ok" : "NO"; }

Eigen::VectorXd as_vector(const std::vector<double>& x) {
  return Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
}

int worker_count(const Settings& s) {
  return s.workers > 0 ? s.workers : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

struct ScenarioRun {
  ResolvedScenario resolved;
  EnsembleResult result;
  double seconds = 0.0;
};

ScenarioRun run_scenario(const std::string& name, int n_traj, int workers) {
  ScenarioRun run{resolve_scenario(name), {}, 0.0};
  const auto& c = run.resolved.config;
  const HamiltonianModel model(ExcitationBasis(c.n_atoms, c.n_excitations), c.couplings());
  EnsembleOptions eo;
  eo.n_traj = n_traj;
  eo.seed = c.rng_seed;
  eo.sigma = c.sigma_um;
  eo.n_workers = workers;
  const Clock clock;
  run.result = run_ensemble(model, c.dynamics(), c.positions(), c.initial_surface - 1,
                            c.bin_width_um, eo);
  run.seconds = clock.seconds();
  return run;
}

int frame_at(const EnsembleObservables& obs, double t) {
  return std::clamp(static_cast<int>(std::lround(t / obs.grid().dt)), 0, obs.grid().n_t - 1);
}

Verdict basis_hamiltonian() {
  const Clock clock;
  const ExcitationBasis basis(5, 2);
  const Eigen::VectorXd r = as_vector(dislocated_end_chain(5, 5.0, 2.5));
  AggregateConfig cfg;
  const Eigen::MatrixXd h = build_hamiltonian(basis, r, cfg.couplings());
  const double ms = clock.seconds() * 1e3;

  bool order = basis.size() == 10;
  std::size_t i = 0;
  for (int n = 0; n < 5 && order; ++n)
    for (int m = n + 1; m < 5; ++m) order = order && basis.tuple_of(i++) == AtomTuple{n, m};
  order = order && basis.label(9) == "|4,5>";
  const bool symmetric = (h - h.transpose()).cwiseAbs().maxCoeff() == 0.0;
  const bool diagonal = (h.diagonal().array() - h(0, 0)).abs().maxCoeff() == 0.0;
  const bool fast = ms < 1.0;
  return {order && symmetric && diagonal && fast,
          "10 ordered states " + mark(order) + ", symmetric " + mark(symmetric) +
              ", constant diagonal " + mark(diagonal) + ", " + fmt(ms, 3) + " ms"};
}

Verdict decomposition() {
  const Clock clock;
  const auto resolved = resolve_scenario("disloc5");
  const auto& c = resolved.config;
  const ExcitationBasis basis(c.n_atoms, c.n_excitations);
  const Eigen::VectorXd r = c.positions();
  const auto s = diagonalize(build_hamiltonian(basis, r, c.couplings()), r);
  const auto d = decompose_biexcitons(s, basis, c.partition(), c.couplings(), 0.99);
  const double seconds = clock.seconds();

  std::set<std::pair<int, int>> pairs;
  int inverted_chain = 0, inverted_dislocation = 0;
  double min_fidelity = 1.0;
  for (const auto& v : d.verdicts) {
    min_fidelity = std::min(min_fidelity, v.fidelity);
    if (v.kind == VerdictKind::product) pairs.insert({v.k_a, v.k_b});
    if (v.kind == VerdictKind::inverted && v.subset == 'A') ++inverted_chain;
    if (v.kind == VerdictKind::inverted && v.subset == 'B' && v.k_b == 1) ++inverted_dislocation;
  }
  const std::set<std::pair<int, int>> expected{{1, 1}, {2, 1}, {3, 1}, {1, 2}, {2, 2}, {3, 2}};
  const bool products = d.count(VerdictKind::product) == 6 && pairs == expected;
  const bool inverted = inverted_chain == 3 && inverted_dislocation == 1 &&
                        d.count(VerdictKind::inverted) == 4;

  // Worked expansion of the lowest state, up to a global sign.
  const double w = 1.0 / (2.0 * std::sqrt(2.0));
  Eigen::VectorXd worked = Eigen::VectorXd::Zero(10);
  auto set = [&](int n, int m, double x) { worked[static_cast<Eigen::Index>(basis.index_of({n - 1, m - 1}))] = x; };
  set(1, 4, w);
  set(2, 4, -2.0 * w / std::sqrt(2.0));
  set(3, 4, w);
  set(1, 5, -w);
  set(2, 5, 2.0 * w / std::sqrt(2.0));
  set(3, 5, -w);
  const Eigen::VectorXd z1 = s.vector(0);
  const double dev = std::min((z1 - worked).cwiseAbs().maxCoeff(), (z1 + worked).cwiseAbs().maxCoeff());
  const bool expansion = dev <= 0.02;
  const bool fast = seconds < 1.0;

  return {products && inverted && expansion && fast,
          "products " + std::to_string(d.count(VerdictKind::product)) + "/6 " + mark(products) +
              ", inverted 3+1 " + mark(inverted) + " at fidelity >= 0.99 (lowest fidelity " +
              fmt(min_fidelity) + "), zeta_1 max deviation " + fmt(dev, 3) + " " +
              mark(expansion) + ", " + fmt(seconds, 3) + " s"};
}

Verdict homogeneous_symmetry() {
  const auto resolved = resolve_scenario("homog5");
  const auto& c = resolved.config;
  const ExcitationBasis basis(c.n_atoms, c.n_excitations);
  const Eigen::VectorXd r = c.positions();
  const auto s = diagonalize(build_hamiltonian(basis, r, c.couplings()), r);
  double worst = 0.0;
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    Eigen::VectorXd mirrored(s.size());
    for (std::size_t j = 0; j < basis.size(); ++j) {
      const auto& t = basis.tuple_of(j);
      mirrored[static_cast<Eigen::Index>(basis.index_of({4 - t[1], 4 - t[0]}))] =
          s.vectors(static_cast<Eigen::Index>(j), k);
    }
    worst = std::max(worst, std::min((mirrored - s.vectors.col(k)).cwiseAbs().maxCoeff(),
                                     (mirrored + s.vectors.col(k)).cwiseAbs().maxCoeff()));
  }
  const auto d = decompose_biexcitons(s, basis, c.partition(), c.couplings(), 0.99);
  double best = 0.0;
  for (const auto& v : d.verdicts) best = std::max(best, v.fidelity);
  const bool sym = worst < 1e-8;
  const bool none = best < 0.99;
  return {sym && none, "reflection residual " + fmt(worst, 3) + " " + mark(sym) +
                           ", best product fidelity " + fmt(best) + " " + mark(none)};
}

Verdict forces_and_couplings() {
  const Clock clock;
  AggregateConfig cfg;
  const ExcitationBasis basis(5, 2);
  const HamiltonianModel model(basis, cfg.couplings());
  std::mt19937_64 rng(2024);
  double force_err = 0.0, nac_err = 0.0;
  int force_geometries = 0, nac_geometries = 0;
  const double h = 1e-6;
  while (force_geometries < 100 || nac_geometries < 100) {
    const Eigen::VectorXd r = oracle::random_chain(rng, 5, 2.0, 7.0);
    const auto s = diagonalize(model.matrix(r), r);
    const double min_gap = (s.energies.tail(9) - s.energies.head(9)).minCoeff();
    // Finite differences of eigenvectors need separated levels.
    if (min_gap < 1e-1) continue;
    if (force_geometries < 100) {
      ++force_geometries;
      for (int k = 0; k < 10; ++k) {
        const Eigen::VectorXd f = surface_force(model, s, k);
        for (int a = 0; a < 5; ++a) {
          const double fd = -oracle::fd_scalar(
              [&](const Eigen::VectorXd& x) { return diagonalize(model.matrix(x), x).energies[k]; },
              r, a, 1e-5);
          force_err = std::max(force_err, std::abs(f[a] - fd) / std::max(1.0, f.cwiseAbs().maxCoeff()));
        }
      }
    }
    if (nac_geometries < 100) {
      ++nac_geometries;
      for (int a = 0; a < 5; ++a) {
        Eigen::VectorXd p = r, m = r;
        p[a] += h;
        m[a] -= h;
        const auto sp = align_gauge(diagonalize(model.matrix(p), p), s).spectrum;
        const auto sm = align_gauge(diagonalize(model.matrix(m), m), s).spectrum;
        for (int k = 0; k < 10; ++k) {
          for (int i = 0; i < 10; ++i) {
            if (i == k) continue;
            const double fd = s.vector(k).dot(sp.vector(i) - sm.vector(i)) / (2.0 * h);
            const double d = nonadiabatic_coupling(model, s, k, i)[a];
            nac_err = std::max(nac_err, std::abs(d - fd) / std::max(1e-3, std::abs(d)));
          }
        }
      }
    }
  }
  const double seconds = clock.seconds();
  const bool f_ok = force_err < 1e-5, n_ok = nac_err < 1e-4, fast = seconds < 10.0;
  return {f_ok && n_ok && fast, "force rel err " + fmt(force_err, 3) + " " + mark(f_ok) +
                                    ", coupling rel err " + fmt(nac_err, 3) + " " + mark(n_ok) +
                                    ", " + fmt(seconds, 3) + " s"};
}

TrajectoryResult single_trajectory(const AggregateConfig& c, double* seconds) {
  const HamiltonianModel model(ExcitationBasis(c.n_atoms, c.n_excitations), c.couplings());
  Engine rng(c.rng_seed);
  const Clock clock;
  auto tr = run_trajectory(model, c.dynamics(), c.positions(), Eigen::VectorXd::Zero(c.n_atoms),
                           c.initial_surface - 1, rng);
  if (seconds) *seconds = clock.seconds();
  return tr;
}

std::vector<double> gaps(const Snapshot& s) {
  std::vector<double> g;
  for (Eigen::Index a = 0; a + 1 < s.positions.size(); ++a)
    g.push_back(s.positions[a + 1] - s.positions[a]);
  return g;
}

Verdict fixed_surface() {
  // Repulsive surface over 1.5 us.
  double rep_seconds = 0.0;
  const auto rep_cfg = resolve_scenario("fixed-surface").config;
  const auto rep = single_trajectory(rep_cfg, &rep_seconds);
  bool monotone = !rep.aborted;
  double worst_dip = 0.0;
  for (std::size_t t = 1; t < rep.snapshots.size(); ++t) {
    const auto a = gaps(rep.snapshots[t - 1]), b = gaps(rep.snapshots[t]);
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (b[i] <= a[i]) {
        monotone = false;
        worst_dip = std::max(worst_dip, a[i] - b[i]);
      }
    }
  }
  double inner_min = 1e300;
  for (const auto& s : rep.snapshots) inner_min = std::min({inner_min, gaps(s)[1], gaps(s)[2]});

  // Attractive surface: look for a gap that shrinks, turns and grows again.
  double att_seconds = 0.0;
  const auto att_cfg = resolve_scenario("fixed-surface-attractive").config;
  const auto att = single_trajectory(att_cfg, &att_seconds);
  bool ordered = !att.aborted;
  for (const auto& s : att.snapshots)
    for (double g : gaps(s)) ordered = ordered && g > 0.0;
  bool rebound = false;
  double closest = 1e300;
  const std::size_t n_gaps = static_cast<std::size_t>(att_cfg.n_atoms - 1);
  for (std::size_t i = 0; i < n_gaps; ++i) {
    std::size_t t_min = 0;
    for (std::size_t t = 0; t < att.snapshots.size(); ++t)
      if (gaps(att.snapshots[t])[i] < gaps(att.snapshots[t_min])[i]) t_min = t;
    const double g0 = gaps(att.snapshots.front())[i];
    const double g_min = gaps(att.snapshots[t_min])[i];
    double after = g_min;
    for (std::size_t t = t_min; t < att.snapshots.size(); ++t) after = std::max(after, gaps(att.snapshots[t])[i]);
    if (t_min > 0 && t_min + 1 < att.snapshots.size() && g0 - g_min > 0.1 && after - g_min > 0.1) {
      rebound = true;
      closest = std::min(closest, g_min);
    }
  }
  // Without the van-der-Waals wall the same start collapses.
  auto no_wall = att_cfg;
  no_wall.c6_mhz_um6 = 0.0;
  const bool vdw = single_trajectory(no_wall, nullptr).aborted;

  const double drift = std::max(rep.diagnostics.max_energy_drift, att.diagnostics.max_energy_drift);
  const bool drift_ok = drift < 1e-3;
  const bool fast = rep_seconds < 5.0 && att_seconds < 5.0;
  return {monotone && rebound && ordered && vdw && drift_ok && fast,
          "repulsive gaps increasing " + mark(monotone) + " (largest step decrease " +
              fmt(worst_dip, 3) + " um, inner gap minimum " + fmt(inner_min) +
              " um), attractive rebound " + mark(rebound) + " at " + fmt(closest) +
              " um, order kept " + mark(ordered) + ", collapse without C6 " + mark(vdw) +
              ", energy drift " + fmt(drift, 3) + " " + mark(drift_ok) + ", " + fmt(rep_seconds, 3) +
              " s / " + fmt(att_seconds, 3) + " s"};
}

Verdict collision(const Settings& set) {
  const auto run = run_scenario("collision", set.n_traj, worker_count(set));
  const auto& obs = run.result.observables;
  const auto& g = obs.grid();
  const int k0 = run.resolved.config.initial_surface - 1;
  const ExcitationBasis basis(run.resolved.config.n_atoms, run.resolved.config.n_excitations);
  const int n = obs.n_atoms();

  double min_p = 1.0;
  for (int t = 0; t < g.n_t; ++t) min_p = std::min(min_p, obs.population(t, k0));

  // Mirror about the chain centre, compared as excitation fraction per bin.
  const Eigen::VectorXd r = run.resolved.config.positions();
  const double centre = 0.5 * (r.minCoeff() + r.maxCoeff());
  double asym = 0.0;
  for (int t = 0; t < g.n_t; ++t) {
    for (int i = 0; i < g.n_r; ++i) {
      const int j = g.bin_of(2.0 * centre - g.bin_center(i));
      asym = std::max(asym, std::abs(obs.e(t, i) - obs.e(t, j)) * g.bin_width / obs.n_excitations());
    }
  }
  const double asym_tol = 3.0 / std::sqrt(static_cast<double>(obs.n_traj()));

  // One of the two excitations moved into the opposite outer pair.
  const auto left = static_cast<int>(basis.index_of({0, 1}));
  const auto right = static_cast<int>(basis.index_of({n - 2, n - 1}));
  double crossed = 0.0;
  for (int t = 0; t < g.n_t; ++t)
    crossed = std::max(crossed, 0.5 * (obs.diabatic_population(t, left) + obs.diabatic_population(t, right)));

  const bool p_ok = min_p >= 0.9, sym_ok = asym < asym_tol, cross_ok = crossed < 0.1;
  const bool fast = run.seconds < 600.0;
  return {p_ok && sym_ok && cross_ok && fast && run.result.aborted == 0,
          "N=" + std::to_string(obs.n_traj()) + ", min initial-surface population " + fmt(min_p) +
              " " + mark(p_ok) + ", mirror deviation " + fmt(asym, 3) + " < " + fmt(asym_tol, 3) +
              " " + mark(sym_ok) + ", crossed weight " + fmt(crossed, 3) + " " + mark(cross_ok) +
              ", aborted " + std::to_string(run.result.aborted) + ", " + fmt(run.seconds, 4) + " s"};
}

Verdict gate(const Settings& set) {
  double reflected[2] = {0.0, 0.0};
  int aborted = 0;
  for (int c = 0; c < 2; ++c) {
    const auto run = run_scenario(c == 0 ? "gate-a" : "gate-b", set.n_traj, worker_count(set));
    const auto& obs = run.result.observables;
    const int last = obs.grid().n_t - 1;
    // Outgoing atoms: the last one leaves towards +r, the first towards -r.
    const double out_pos = obs.atom_excitation(last, obs.n_atoms() - 1);
    const double out_neg = obs.atom_excitation(last, 0);
    reflected[c] = out_pos / (out_pos + out_neg);
    aborted += run.result.aborted;
  }
  const bool a_ok = reflected[0] > 0.6, b_ok = 1.0 - reflected[1] > 0.6;
  return {a_ok && b_ok, "phi_2 gate reflected share " + fmt(reflected[0], 3) + " " + mark(a_ok) +
                            ", phi_3 gate transmitted share " + fmt(1.0 - reflected[1], 3) + " " +
                            mark(b_ok) + ", aborted " + std::to_string(aborted)};
}

/// Modes of a histogram of trajectory counts. A local maximum counts if it
/// reaches 5% of the peak; two neighbouring maxima are separate modes only if
/// the dip between them lies 3 Poisson standard deviations below the lower one.
int count_modes(const std::vector<double>& counts) {
  const int n = static_cast<int>(counts.size());
  const double peak = *std::max_element(counts.begin(), counts.end());
  std::vector<int> modes;
  for (int i = 1; i + 1 < n; ++i) {
    if (!(counts[i] > counts[i - 1] && counts[i] >= counts[i + 1] && counts[i] >= 0.05 * peak)) continue;
    if (!modes.empty()) {
      const int prev = modes.back();
      const double dip = *std::min_element(counts.begin() + prev, counts.begin() + i + 1);
      const double low = std::min(counts[prev], counts[i]);
      if (low - dip <= 3.0 * std::sqrt(low + dip)) {
        if (counts[i] > counts[prev]) modes.back() = i;
        continue;
      }
    }
    modes.push_back(i);
  }
  return static_cast<int>(modes.size());
}

Verdict nonadiabatic(const Settings& set) {
  const auto run = run_scenario("nonadiabatic", set.n_traj, worker_count(set));
  const auto& obs = run.result.observables;
  const auto& g = obs.grid();
  const int last = g.n_t - 1;

  int involved = 0;
  double mismatch = 0.0;
  for (int k = 0; k < obs.n_surfaces(); ++k) {
    involved += obs.population(last, k) > 0.1 ? 1 : 0;
    for (int t = 0; t < g.n_t; ++t)
      mismatch = std::max(mismatch, std::abs(obs.population(t, k) - obs.fraction(t, k)));
  }

  const int t1 = frame_at(obs, 1.0);
  int split_atoms = 0, most_modes = 0;
  for (int a = 0; a < obs.n_atoms(); ++a) {
    std::vector<double> counts(static_cast<std::size_t>(g.n_r));
    for (int i = 0; i < g.n_r; ++i)
      counts[i] = obs.atom_density(t1, a, i) * g.bin_width * static_cast<double>(obs.n_traj());
    const int modes = count_modes(counts);
    most_modes = std::max(most_modes, modes);
    split_atoms += modes >= 2 ? 1 : 0;
  }

  std::size_t accepted = 0, frustrated = 0;
  for (const auto& h : run.result.hops) {
    accepted += h.hop.accepted ? 1 : 0;
    frustrated += h.hop.frustrated ? 1 : 0;
  }
  const bool three = involved >= 3, consistent = mismatch < 0.1, split = split_atoms >= 1;
  return {three && consistent && split,
          "N=" + std::to_string(obs.n_traj()) + ", surfaces above 0.1 at t_final " +
              std::to_string(involved) + " " + mark(three) + ", max |p-f| " + fmt(mismatch, 3) +
              " " + mark(consistent) + ", atoms with split density at 1 us " +
              std::to_string(split_atoms) + " (most modes " + std::to_string(most_modes) + ") " +
              mark(split) + ", hops " + std::to_string(accepted) + " accepted / " +
              std::to_string(frustrated) + " frustrated, " + fmt(run.seconds, 4) + " s"};
}

Verdict lifetime() {
  const double tau = lifetime_estimate(70.0, 232.0, 3, 2);
  return {std::abs(tau - 19.4) <= 0.05, fmt(tau, 6) + " us"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Verdict determinism() {
  const int n_traj = 64;
  const fs::path base = fs::temp_directory_path() / "rydagg_acceptance_determinism";
  fs::remove_all(base);
  std::vector<fs::path> dirs;
  for (int workers : {1, 8}) {
    const auto run = run_scenario("nonadiabatic", n_traj, workers);
    RunSummary summary;
    summary.scenario = run.resolved.spec.name;
    summary.selection_fidelity = run.resolved.selection_fidelity;
    auto cfg = run.resolved.config;
    cfg.n_traj = n_traj;
    dirs.push_back(base / ("workers_" + std::to_string(workers)));
    write_ensemble_outputs(dirs.back(), cfg, run.result, summary);
  }
  int files = 0, differing = 0;
  for (const auto& entry : fs::directory_iterator(dirs[0])) {
    if (entry.path().extension() != ".csv") continue;
    ++files;
    const fs::path other = dirs[1] / entry.path().filename();
    if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) ++differing;
  }
  fs::remove_all(base);
  return {files > 0 && differing == 0, std::to_string(files) + " CSV files, " +
                                           std::to_string(differing) +
                                           " differ between 1 and 8 workers (N=64)"};
}

}  // namespace

int main(int argc, char** argv) {
  Settings set;
  CLI::App app{"Acceptance checks"};
  app.add_option("--n-traj", set.n_traj, "Trajectories per ensemble scenario")->check(CLI::PositiveNumber);
  app.add_option("--workers", set.workers, "Worker threads (default: all cores)");
  app.add_option("--only", set.only, "Run only criteria whose name contains this text");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"basis-hamiltonian", basis_hamiltonian},
      {"decomposition", decomposition},
      {"homogeneous-symmetry", homogeneous_symmetry},
      {"force-correctness", forces_and_couplings},
      {"fixed-surface-motion", fixed_surface},
      {"collision", [&] { return collision(set); }},
      {"gate", [&] { return gate(set); }},
      {"nonadiabatic", [&] { return nonadiabatic(set); }},
      {"lifetime", lifetime},
      {"determinism", determinism},
  };

  int failed = 0;
  for (const auto& [name, check] : criteria) {
    if (!set.only.empty() && name.find(set.only) == std::string::npos) continue;
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += v.pass ? 0 : 1;
    std::cout << (v.pass ? "PASS  " : "FAIL  ") << name << "  " << v.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
