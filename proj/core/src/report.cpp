#include "rydagg/report.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace rydagg {

std::string format_number(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

void write_spectrum_csv(std::ostream& out, const ExcitonSpectrum& spectrum) {
  out << "k,energy\n";
  for (Eigen::Index k = 0; k < spectrum.size(); ++k) {
    out << k + 1 << ',' << format_number(spectrum.energies[k]) << '\n';
  }
}

void write_tiles_csv(std::ostream& out, const ExcitonSpectrum& spectrum,
                     const ExcitationBasis& basis) {
  out << "k,n,m,value\n";
  for (Eigen::Index k = 0; k < spectrum.size(); ++k) {
    for (std::size_t s = 0; s < basis.size(); ++s) {
      const auto& t = basis.tuple_of(s);
      const int n = t.front() + 1;
      const int m = t.back() + 1;
      out << k + 1 << ',' << n << ',' << m << ','
          << format_number(spectrum.vectors(static_cast<Eigen::Index>(s), k)) << '\n';
    }
  }
}

void write_decomposition_csv(std::ostream& out, const ProductDecomposition& d) {
  out << "state,energy,verdict,k_A,k_B,fidelity\n";
  for (const auto& v : d.verdicts) {
    std::string verdict = to_string(v.kind);
    if (v.kind == VerdictKind::inverted) verdict += std::string("-") + v.subset;
    out << v.state << ',' << format_number(v.energy) << ',' << verdict << ',' << v.k_a << ','
        << v.k_b << ',' << format_number(v.fidelity) << '\n';
  }
}

void write_subchains_csv(std::ostream& out, const ProductDecomposition& d) {
  out << "subset,k,energy,atom,coefficient\n";
  auto emit = [&](char name, const SubchainSpectrum& sub) {
    for (Eigen::Index k = 0; k < sub.single.size(); ++k) {
      for (std::size_t i = 0; i < sub.atoms.size(); ++i) {
        out << name << ',' << k + 1 << ',' << format_number(sub.single.energies[k]) << ','
            << sub.atoms[i] + 1 << ','
            << format_number(sub.single.vectors(static_cast<Eigen::Index>(i), k)) << '\n';
      }
    }
  };
  emit('A', d.sub_a);
  emit('B', d.sub_b);
}

void write_density_csv(std::ostream& out, const EnsembleObservables& obs, bool excitation) {
  const auto& g = obs.grid();
  out << "t,r,value\n";
  for (int t = 0; t < g.n_t; ++t) {
    const std::string time = format_number(t * g.dt);
    for (int r = 0; r < g.n_r; ++r) {
      out << time << ',' << format_number(g.bin_center(r)) << ','
          << format_number(excitation ? obs.e(t, r) : obs.rho(t, r)) << '\n';
    }
  }
}

void write_atom_density_csv(std::ostream& out, const EnsembleObservables& obs) {
  const auto& g = obs.grid();
  out << "t,atom,r,value\n";
  for (int t = 0; t < g.n_t; ++t) {
    const std::string time = format_number(t * g.dt);
    for (int a = 0; a < obs.n_atoms(); ++a) {
      for (int r = 0; r < g.n_r; ++r) {
        out << time << ',' << a + 1 << ',' << format_number(g.bin_center(r)) << ','
            << format_number(obs.atom_density(t, a, r)) << '\n';
      }
    }
  }
}

void write_populations_csv(std::ostream& out, const EnsembleObservables& obs) {
  const auto& g = obs.grid();
  out << "t,k,p_k,f_k\n";
  for (int t = 0; t < g.n_t; ++t) {
    const std::string time = format_number(t * g.dt);
    for (int k = 0; k < obs.n_surfaces(); ++k) {
      out << time << ',' << k + 1 << ',' << format_number(obs.population(t, k)) << ','
          << format_number(obs.fraction(t, k)) << '\n';
    }
  }
}

void write_diabatic_csv(std::ostream& out, const EnsembleObservables& obs,
                        const ExcitationBasis& basis) {
  const auto& g = obs.grid();
  out << "t,j,atoms,population\n";
  for (int t = 0; t < g.n_t; ++t) {
    const std::string time = format_number(t * g.dt);
    for (std::size_t j = 0; j < basis.size(); ++j) {
      out << time << ',' << j + 1 << ',';
      const auto& atoms = basis.tuple_of(j);
      for (std::size_t i = 0; i < atoms.size(); ++i) out << (i ? " " : "") << atoms[i] + 1;
      out << ',' << format_number(obs.diabatic_population(t, static_cast<int>(j))) << '\n';
    }
  }
}

void write_atoms_csv(std::ostream& out, const EnsembleObservables& obs) {
  const auto& g = obs.grid();
  out << "t,atom,mean_position,excitation\n";
  for (int t = 0; t < g.n_t; ++t) {
    const std::string time = format_number(t * g.dt);
    for (int a = 0; a < obs.n_atoms(); ++a) {
      out << time << ',' << a + 1 << ',' << format_number(obs.mean_position(t, a)) << ','
          << format_number(obs.atom_excitation(t, a)) << '\n';
    }
  }
}

void write_hops_csv(std::ostream& out, const std::vector<TrajectoryHop>& hops) {
  out << "trajectory,t,from,to,accepted,frustrated,kinetic_adjustment\n";
  for (const auto& h : hops) {
    out << h.trajectory << ',' << format_number(h.hop.t) << ',' << h.hop.from + 1 << ','
        << h.hop.to + 1 << ',' << (h.hop.accepted ? 1 : 0) << ',' << (h.hop.frustrated ? 1 : 0)
        << ',' << format_number(h.hop.kinetic_adjustment) << '\n';
  }
}

void write_trajectory_csv(std::ostream& out, const TrajectoryResult& trajectory) {
  if (trajectory.snapshots.empty()) return;
  const auto n = trajectory.snapshots.front().positions.size();
  const auto m = trajectory.snapshots.front().adiabatic_populations.size();
  out << "t";
  for (Eigen::Index a = 0; a < n; ++a) out << ",r_" << a + 1;
  for (Eigen::Index a = 0; a < n; ++a) out << ",v_" << a + 1;
  out << ",surface";
  for (Eigen::Index k = 0; k < m; ++k) out << ",p_" << k + 1;
  for (Eigen::Index k = 0; k < m; ++k) out << ",diab_" << k + 1;
  out << '\n';
  for (const auto& s : trajectory.snapshots) {
    out << format_number(s.t);
    for (Eigen::Index a = 0; a < n; ++a) out << ',' << format_number(s.positions[a]);
    for (Eigen::Index a = 0; a < n; ++a) out << ',' << format_number(s.velocities[a]);
    out << ',' << s.surface + 1;
    for (Eigen::Index k = 0; k < m; ++k) out << ',' << format_number(s.adiabatic_populations[k]);
    for (Eigen::Index k = 0; k < m; ++k) out << ',' << format_number(s.diabatic_populations[k]);
    out << '\n';
  }
}

void write_meta(std::ostream& out, const AggregateConfig& config, const RunSummary& s) {
  out << "# resolved configuration\n" << serialize_config(config);
  out << "# results\n"
      << "scenario = " << s.scenario << '\n'
      << "selection_fidelity = " << format_number(s.selection_fidelity) << '\n'
      << "seed = " << config.rng_seed << '\n'
      << "n_traj_effective = " << s.n_traj_effective << '\n'
      << "aborted = " << s.aborted << '\n'
      << "e0 = " << format_number(s.e0) << '\n'
      << "rho0 = " << format_number(s.rho0) << '\n'
      << "accepted_hops = " << s.accepted_hops << '\n'
      << "frustrated_hops = " << s.frustrated_hops << '\n'
      << "degenerate_couplings = " << s.diagnostics.degenerate_couplings << '\n'
      << "renormalizations = " << s.diagnostics.renormalizations << '\n'
      << "low_overlap_steps = " << s.diagnostics.low_overlap_steps << '\n'
      << "min_gauge_overlap = " << format_number(s.diagnostics.min_gauge_overlap) << '\n'
      << "max_energy_drift = " << format_number(s.diagnostics.max_energy_drift) << '\n'
      << "max_norm_error = " << format_number(s.diagnostics.max_norm_error) << '\n';
}

void write_ensemble_outputs(const std::filesystem::path& dir, const AggregateConfig& config,
                            const EnsembleResult& result, RunSummary summary) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream f(dir / name);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    return f;
  };
  const auto& obs = result.observables;
  {
    auto f = open("density_e.csv");
    write_density_csv(f, obs, true);
  }
  {
    auto f = open("density_rho.csv");
    write_density_csv(f, obs, false);
  }
  {
    auto f = open("density_atoms.csv");
    write_atom_density_csv(f, obs);
  }
  {
    auto f = open("populations.csv");
    write_populations_csv(f, obs);
  }
  {
    auto f = open("diabatic.csv");
    write_diabatic_csv(f, obs, ExcitationBasis(config.n_atoms, config.n_excitations));
  }
  {
    auto f = open("atoms.csv");
    write_atoms_csv(f, obs);
  }
  {
    auto f = open("hops.csv");
    write_hops_csv(f, result.hops);
  }
  summary.aborted = result.aborted;
  summary.n_traj_effective = obs.n_traj();
  summary.e0 = obs.e0();
  summary.rho0 = obs.rho0();
  summary.accepted_hops = 0;
  summary.frustrated_hops = 0;
  for (const auto& h : result.hops) {
    summary.accepted_hops += h.hop.accepted ? 1 : 0;
    summary.frustrated_hops += h.hop.frustrated ? 1 : 0;
  }
  summary.diagnostics = result.diagnostics;
  auto f = open("meta.txt");
  write_meta(f, config, summary);
}

}  // namespace rydagg
