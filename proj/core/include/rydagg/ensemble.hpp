#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "rydagg/basis.hpp"
#include "rydagg/dynamics.hpp"
#include "rydagg/hamiltonian.hpp"

namespace rydagg {

/// Gaussian initial conditions: positions around `mean` with width sigma,
/// velocities around zero with width sigma_v = hbar/(M sigma), uncorrelated.
struct InitialSampler {
  Eigen::VectorXd mean;
  double sigma = 0.0;
  double sigma_v = 0.0;
  std::uint64_t seed = 0;
};

InitialSampler make_sampler(const Eigen::VectorXd& mean, double sigma, double mass_internal,
                            std::uint64_t seed);

struct InitialCondition {
  Eigen::VectorXd positions;
  Eigen::VectorXd velocities;
};

/// Draw for trajectory `index` only; identical to element `index` of
/// sample_initials.
InitialCondition sample_initial(const InitialSampler& sampler, std::uint64_t index);
std::vector<InitialCondition> sample_initials(const InitialSampler& sampler, int n_traj);

/// Probability that `atom` carries an excitation.
double excitation_weight(const Eigen::VectorXcd& coeffs, const ExcitationBasis& basis, int atom);
/// Same, from |c_j|^2.
double excitation_weight(const Eigen::VectorXd& populations, const ExcitationBasis& basis, int atom);

/// Space-time grid. Time frames are t_j = j * dt (j < n_t); spatial bins are
/// [r0 + i*bin_width, r0 + (i+1)*bin_width). Positions outside the range go
/// to the edge bins so every atom is counted once.
struct ObservableGrid {
  double dt = 1e-2;
  int n_t = 0;
  double r0 = 0.0;
  double bin_width = 0.25;
  int n_r = 0;

  int bin_of(double r) const;
  double bin_center(int i) const { return r0 + (i + 0.5) * bin_width; }
  bool operator==(const ObservableGrid&) const = default;
};

/// Grid covering the chain with `margin` um to spare on both sides.
ObservableGrid make_grid(const Eigen::VectorXd& positions, double bin_width, double frame_dt,
                         int n_frames, double margin = 10.0);

/// Raw ensemble sums; normalized views are computed on read. Merging is plain
/// addition, so any reduction tree gives the same totals up to rounding, and
/// a fixed tree gives bit-identical ones.
class EnsembleObservables {
 public:
  EnsembleObservables() = default;
  EnsembleObservables(ObservableGrid grid, int n_atoms, int n_excitations, int n_surfaces);

  void add_trajectory(const TrajectoryResult& trajectory, const ExcitationBasis& basis);
  /// Throws std::invalid_argument on grid or shape mismatch.
  void merge(const EnsembleObservables& other);

  const ObservableGrid& grid() const noexcept { return grid_; }
  int n_atoms() const noexcept { return n_atoms_; }
  int n_excitations() const noexcept { return q_; }
  int n_surfaces() const noexcept { return n_surfaces_; }
  long long n_traj() const noexcept { return n_traj_; }

  /// Excitation density e(r,t); integrates to q over r.
  double e(int t, int r) const;
  /// Atomic density rho(r,t); integrates to N over r.
  double rho(int t, int r) const;
  /// Per-atom densities; rho = sum over atoms.
  double atom_density(int t, int atom, int r) const;
  /// Ensemble mean of |c~_k|^2.
  double population(int t, int k) const;
  /// Ensemble mean of |c_j|^2 for basis state j.
  double diabatic_population(int t, int j) const;
  /// Fraction of trajectories on surface k.
  double fraction(int t, int k) const;
  /// Mean excitation probability of atom n and mean position of atom n.
  double atom_excitation(int t, int atom) const;
  double mean_position(int t, int atom) const;

  double e0() const;
  double rho0() const;

 private:
  std::size_t idx_tr(int t, int r) const { return static_cast<std::size_t>(t) * grid_.n_r + r; }

  ObservableGrid grid_;
  int n_atoms_ = 0;
  int q_ = 0;
  int n_surfaces_ = 0;
  long long n_traj_ = 0;
  std::vector<double> e_sum_;
  std::vector<double> atom_density_sum_;  // [t][atom][r]
  std::vector<double> population_sum_;    // [t][k]
  std::vector<double> diabatic_sum_;      // [t][j]
  std::vector<long long> surface_count_;  // [t][k]
  std::vector<double> atom_excitation_sum_;  // [t][atom]
  std::vector<double> position_sum_;         // [t][atom]
};

struct EnsembleOptions {
  int n_traj = 2000;
  int n_workers = 1;
  std::uint64_t seed = 1;
  double sigma = 0.3;
  int block_size = 16;  // fixed reduction granularity; independent of n_workers
};

struct TrajectoryHop {
  int trajectory = 0;
  HopRecord hop;
};

struct EnsembleResult {
  EnsembleObservables observables;
  std::vector<TrajectoryHop> hops;  // ordered by trajectory, then time
  int aborted = 0;
  DynamicsDiagnostics diagnostics;  // worst case over trajectories; counters summed
};

/// Run n_traj trajectories from sampled initial conditions around `mean`.
EnsembleResult run_ensemble(const HamiltonianModel& model, const DynamicsOptions& dynamics,
                            const Eigen::VectorXd& mean, int initial_surface, double bin_width,
                            const EnsembleOptions& options);

}  // namespace rydagg
