// rydagg: spectra, ensemble dynamics and self-checks for flexible Rydberg
// aggregates with one or two excitations.
//
// Exit status: 0 ok, 1 usage/config error, 2 runtime error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <thread>

#include "rydagg/basis.hpp"
#include "rydagg/config.hpp"
#include "rydagg/decomposition.hpp"
#include "rydagg/ensemble.hpp"
#include "rydagg/errors.hpp"
#include "rydagg/hamiltonian.hpp"
#include "rydagg/report.hpp"
#include "rydagg/scenario.hpp"
#include "rydagg/selfcheck.hpp"
#include "rydagg/spectrum.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kUsageError = 1;
constexpr int kRuntimeError = 2;

struct CommonOptions {
  std::string scenario;
  std::string config;
  std::string out;
  std::optional<int> n_traj;
  std::optional<std::uint64_t> seed;
  std::optional<double> dt;
  std::optional<std::string> mode;
  int workers = 0;
  int dump = 1;
};

rydagg::ResolvedScenario load(const CommonOptions& opt) {
  if (opt.scenario.empty() == opt.config.empty()) {
    throw rydagg::ConfigError("give exactly one of --scenario or --config");
  }
  rydagg::ResolvedScenario r = opt.config.empty() ? rydagg::resolve_scenario(opt.scenario)
                                                  : rydagg::resolve_config_file(opt.config);
  auto& c = r.config;
  if (opt.n_traj) c.n_traj = *opt.n_traj;
  if (opt.seed) c.rng_seed = *opt.seed;
  if (opt.dt) c.dt_us = *opt.dt;
  if (opt.mode) c.mode = rydagg::parse_mode(*opt.mode);
  c.validate();
  return r;
}

fs::path output_dir(const CommonOptions& opt, const rydagg::AggregateConfig& c) {
  return opt.out.empty() ? fs::path("out") / c.name : fs::path(opt.out);
}

std::ofstream open_file(const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  return f;
}

int cmd_spectra(const CommonOptions& opt) {
  const auto resolved = load(opt);
  const auto& c = resolved.config;
  const rydagg::ExcitationBasis basis(c.n_atoms, c.n_excitations);
  const auto spectrum =
      rydagg::diagonalize(rydagg::build_hamiltonian(basis, c.positions(), c.couplings()), c.positions());

  const fs::path dir = output_dir(opt, c);
  fs::create_directories(dir);
  {
    auto f = open_file(dir / "spectrum.csv");
    rydagg::write_spectrum_csv(f, spectrum);
  }
  {
    auto f = open_file(dir / "tiles.csv");
    rydagg::write_tiles_csv(f, spectrum, basis);
  }
  {
    auto f = open_file(dir / "meta.txt");
    f << "# resolved configuration\n" << rydagg::serialize_config(c);
  }

  std::cout << "scenario " << resolved.spec.name << ": " << resolved.spec.summary << '\n';
  std::cout << "basis size " << basis.size() << ", outputs in " << dir.string() << '\n';
  if (c.n_excitations != 2) {
    for (Eigen::Index k = 0; k < spectrum.size(); ++k) {
      std::cout << "  U_" << k + 1 << " = " << spectrum.energies[k] << " rad/us\n";
    }
    return 0;
  }

  const auto decomposition =
      rydagg::decompose_biexcitons(spectrum, basis, c.partition(), c.couplings());
  {
    auto f = open_file(dir / "decomposition.csv");
    rydagg::write_decomposition_csv(f, decomposition);
  }
  {
    auto f = open_file(dir / "subchains.csv");
    rydagg::write_subchains_csv(f, decomposition);
  }
  std::cout << std::fixed << std::setprecision(4);
  for (const auto& v : decomposition.verdicts) {
    std::cout << "  zeta_" << std::setw(2) << std::left << v.state << std::right
              << "  O = " << std::setw(10) << v.energy << "  " << std::setw(10)
              << rydagg::to_string(v.kind);
    if (v.kind == rydagg::VerdictKind::product) {
      std::cout << "  phi_A" << v.k_a << " x phi_B" << v.k_b;
    } else if (v.kind == rydagg::VerdictKind::inverted) {
      std::cout << "  both in " << v.subset << ", k=" << (v.subset == 'A' ? v.k_a : v.k_b) << "   ";
    } else {
      std::cout << "                ";
    }
    std::cout << "  F = " << v.fidelity << '\n';
  }
  return 0;
}

int cmd_run(const CommonOptions& opt) {
  const auto resolved = load(opt);
  const auto& c = resolved.config;
  if (!resolved.spec.dynamical) {
    throw rydagg::ConfigError("scenario '" + resolved.spec.name +
                              "' is a static analysis; use the spectra subcommand");
  }
  const rydagg::HamiltonianModel model(rydagg::ExcitationBasis(c.n_atoms, c.n_excitations),
                                       c.couplings());
  rydagg::EnsembleOptions eo;
  eo.n_traj = c.n_traj;
  eo.seed = c.rng_seed;
  eo.sigma = c.sigma_um;
  eo.n_workers = opt.workers > 0 ? opt.workers
                                 : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const auto dynamics = c.dynamics();

  std::cout << "scenario " << resolved.spec.name << ": " << resolved.spec.summary << '\n'
            << "initial surface " << c.initial_surface << " (selection fidelity "
            << resolved.selection_fidelity << "), " << c.n_traj << " trajectories on "
            << eo.n_workers << " worker(s)\n";

  const auto result =
      rydagg::run_ensemble(model, dynamics, c.positions(), c.initial_surface - 1, c.bin_width_um, eo);

  const fs::path dir = output_dir(opt, c);
  rydagg::RunSummary summary;
  summary.scenario = resolved.spec.name;
  summary.selection_fidelity = resolved.selection_fidelity;
  rydagg::write_ensemble_outputs(dir, c, result, summary);

  const int dumps = std::min(opt.dump, c.n_traj);
  const auto sampler = rydagg::make_sampler(c.positions(), c.sigma_um, c.mass(), c.rng_seed);
  for (int i = 0; i < dumps; ++i) {
    const auto ic = rydagg::sample_initial(sampler, static_cast<std::uint64_t>(i));
    auto rng = rydagg::make_stream(c.rng_seed, static_cast<std::uint64_t>(i),
                                   rydagg::StreamPurpose::hopping);
    const auto tr = rydagg::run_trajectory(model, dynamics, ic.positions, ic.velocities,
                                           c.initial_surface - 1, rng);
    auto f = open_file(dir / ("trajectory_" + std::to_string(i) + ".csv"));
    rydagg::write_trajectory_csv(f, tr);
  }

  const auto& obs = result.observables;
  const int last = obs.grid().n_t - 1;
  std::cout << "completed " << obs.n_traj() << " (aborted " << result.aborted << "), hops "
            << result.hops.size() << ", outputs in " << dir.string() << '\n';
  std::cout << "final adiabatic populations / trajectory fractions:\n";
  for (int k = 0; k < obs.n_surfaces(); ++k) {
    if (obs.population(last, k) < 1e-3 && obs.fraction(last, k) == 0.0) continue;
    std::cout << "  k=" << k + 1 << "  p=" << obs.population(last, k) << "  f=" << obs.fraction(last, k)
              << '\n';
  }
  return 0;
}

int cmd_check() {
  int failed = 0;
  for (const auto& r : rydagg::run_self_checks()) {
    std::cout << (r.passed ? "PASS  " : "FAIL  ") << r.name << "  (" << r.detail << ")\n";
    failed += r.passed ? 0 : 1;
  }
  return failed == 0 ? 0 : kRuntimeError;
}

void add_common(CLI::App* cmd, CommonOptions& opt, bool dynamics) {
  cmd->add_option("--scenario", opt.scenario, "Built-in scenario name");
  cmd->add_option("--config", opt.config, "Key-value configuration file");
  cmd->add_option("--out", opt.out, "Output directory (default out/<name>)");
  cmd->add_option("--n-traj", opt.n_traj, "Number of trajectories")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", opt.seed, "Root random seed");
  cmd->add_option("--dt", opt.dt, "Nuclear time step in us")->check(CLI::PositiveNumber);
  cmd->add_option("--mode", opt.mode, "fssh or fixed-surface")
      ->check(CLI::IsMember({"fssh", "fixed-surface"}));
  if (dynamics) {
    cmd->add_option("--workers", opt.workers, "Worker threads (default: hardware concurrency)")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--dump", opt.dump, "Write per-trajectory CSV for the first N trajectories")
        ->check(CLI::NonNegativeNumber);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flexible Rydberg aggregate simulator"};
  app.require_subcommand(1);
  std::string scenarios;
  for (const auto& n : rydagg::scenario_names()) scenarios += (scenarios.empty() ? "" : ", ") + n;
  app.footer("Scenarios: " + scenarios);

  CommonOptions spectra_opt, run_opt;
  auto* spectra = app.add_subcommand("spectra", "Diagonalize and decompose bi-exciton states");
  add_common(spectra, spectra_opt, false);
  auto* run = app.add_subcommand("run", "Run a trajectory ensemble");
  add_common(run, run_opt, true);
  auto* check = app.add_subcommand("check", "Run the built-in oracle checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*spectra) return cmd_spectra(spectra_opt);
    if (*run) return cmd_run(run_opt);
    if (*check) return cmd_check();
  } catch (const rydagg::ConfigError& e) {
    std::cerr << "rydagg: config error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "rydagg: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kUsageError;
}
