#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "rydagg/basis.hpp"
#include "rydagg/config.hpp"
#include "rydagg/decomposition.hpp"
#include "rydagg/dynamics.hpp"
#include "rydagg/ensemble.hpp"
#include "rydagg/spectrum.hpp"

namespace rydagg {

/// Shortest round-trip decimal form; keeps output byte-identical across runs.
std::string format_number(double x);

// Static analysis outputs.
void write_spectrum_csv(std::ostream& out, const ExcitonSpectrum& spectrum);
/// Columns: k, n, m, value (1-based atoms, n < m). For q=1 m repeats n.
void write_tiles_csv(std::ostream& out, const ExcitonSpectrum& spectrum, const ExcitationBasis& basis);
/// Columns: state, energy, verdict, k_A, k_B, fidelity.
void write_decomposition_csv(std::ostream& out, const ProductDecomposition& decomposition);
/// Columns: subset, k, energy, atom, coefficient.
void write_subchains_csv(std::ostream& out, const ProductDecomposition& decomposition);

// Ensemble outputs.
void write_density_csv(std::ostream& out, const EnsembleObservables& obs, bool excitation);
/// Columns: t, atom, r, value; per-atom densities that sum to rho.
void write_atom_density_csv(std::ostream& out, const EnsembleObservables& obs);
/// Columns: t, k, p_k, f_k (k 1-based).
void write_populations_csv(std::ostream& out, const EnsembleObservables& obs);
/// Columns: t, j, atoms (space separated, 1-based), population.
void write_diabatic_csv(std::ostream& out, const EnsembleObservables& obs,
                        const ExcitationBasis& basis);
/// Columns: t, atom, mean_position, excitation.
void write_atoms_csv(std::ostream& out, const EnsembleObservables& obs);
/// Columns: trajectory, t, from, to, accepted, frustrated, kinetic_adjustment.
void write_hops_csv(std::ostream& out, const std::vector<TrajectoryHop>& hops);
/// Columns: t, r_1..r_N, v_1..v_N, surface, p_1..p_Nbar (adiabatic), diab_1..diab_Nbar.
void write_trajectory_csv(std::ostream& out, const TrajectoryResult& trajectory);

struct RunSummary {
  std::string scenario;
  double selection_fidelity = 1.0;
  int aborted = 0;
  long long n_traj_effective = 0;
  double e0 = 0.0;
  double rho0 = 0.0;
  std::size_t accepted_hops = 0;
  std::size_t frustrated_hops = 0;
  DynamicsDiagnostics diagnostics;
};

/// Resolved config echo followed by a results block, all "key = value".
void write_meta(std::ostream& out, const AggregateConfig& config, const RunSummary& summary);

/// Write every ensemble file into `dir` (created if missing).
void write_ensemble_outputs(const std::filesystem::path& dir, const AggregateConfig& config,
                            const EnsembleResult& result, RunSummary summary);

}  // namespace rydagg
