#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "rydagg/hamiltonian.hpp"
#include "rydagg/rng.hpp"
#include "rydagg/spectrum.hpp"

namespace rydagg {

enum class Mode { fixed_surface, fssh };

struct DynamicsOptions {
  double mass = 0.0;  // internal units, see units::mass_from_kg
  double dt = 1e-4;   // nuclear step, us
  int n_sub_electronic = 10;
  double t_final = 1.5;
  double output_stride = 1e-2;
  Mode mode = Mode::fssh;
  bool freeze_coefficients = false;  // fixed-surface mode: skip electronic propagation
  bool reverse_on_frustrated = false;
  double eps_degenerate = 1e-6;  // rad/us
  double d_max = 1e6;            // 1/um
  double r_min = 0.1;            // um
};

/// Classical nuclei plus electronic amplitudes in the diabatic basis.
/// `spectrum`, `hamiltonian` and `force` always describe `positions`.
struct TrajectoryState {
  double t = 0.0;
  Eigen::VectorXd positions;
  Eigen::VectorXd velocities;
  Eigen::VectorXcd coeffs;
  int surface = 0;  // 0-based active surface
  ExcitonSpectrum spectrum;
  Eigen::MatrixXd hamiltonian;
  Eigen::VectorXd force;

  double kinetic_energy(double mass) const { return 0.5 * mass * velocities.squaredNorm(); }
  double potential_energy() const { return spectrum.energies[surface]; }
  double total_energy(double mass) const { return kinetic_energy(mass) + potential_energy(); }
  /// c~_k = <zeta_k|Psi>
  Eigen::VectorXcd adiabatic_amplitudes() const;
};

struct HopRecord {
  double t = 0.0;
  int from = 0;  // 0-based
  int to = 0;
  bool accepted = false;
  bool frustrated = false;
  double kinetic_adjustment = 0.0;
};

struct DynamicsDiagnostics {
  int degenerate_couplings = 0;  // NAC components capped by the degeneracy guard
  int renormalizations = 0;
  int low_overlap_steps = 0;  // gauge alignment overlaps below 0.9
  double min_gauge_overlap = 1.0;
  double max_energy_drift = 0.0;  // relative, measured against the last hop
  double max_norm_error = 0.0;
};

/// -<zeta_s| dH/dr_a |zeta_s>. Throws std::invalid_argument for a bad index.
Eigen::VectorXd surface_force(const HamiltonianModel& model, const ExcitonSpectrum& spectrum,
                              int surface);

/// d_ki = <zeta_k| grad zeta_i> = <zeta_k| grad H |zeta_i> / (O_i - O_k).
/// Inside |O_i - O_k| < eps_degenerate every component is clipped to d_max
/// and `capped` (if given) is set.
Eigen::VectorXd nonadiabatic_coupling(const HamiltonianModel& model,
                                      const ExcitonSpectrum& spectrum, int k, int i,
                                      double eps_degenerate = 1e-6, double d_max = 1e6,
                                      bool* capped = nullptr);

/// Start on `surface` with the electronic state set to that eigenvector.
TrajectoryState prepare_state(const HamiltonianModel& model, const Eigen::VectorXd& positions,
                              const Eigen::VectorXd& velocities, int surface);

/// Velocity-Verlet step on the active surface; re-diagonalizes and aligns the
/// gauge at the new geometry. Returns the Hamiltonian at the start of the step
/// for the electronic propagation. Throws TrajectoryAborted below r_min.
Eigen::MatrixXd step_nuclear(const HamiltonianModel& model, const DynamicsOptions& options,
                             TrajectoryState& state, DynamicsDiagnostics& diagnostics);

/// One RK4 substep of i dc/dt = H(t) c with H linear from h_begin to h_end over
/// the substep.
Eigen::VectorXcd step_electronic(const Eigen::VectorXcd& coeffs, const Eigen::MatrixXd& h_begin,
                                 const Eigen::MatrixXd& h_end, double dt_sub);

/// Advance `coeffs` across one nuclear step in n_sub substeps, interpolating
/// H linearly. Renormalizes when the norm drifts by more than 1e-10.
void propagate_electronic(Eigen::VectorXcd& coeffs, const Eigen::MatrixXd& h_begin,
                          const Eigen::MatrixXd& h_end, double dt, int n_sub,
                          DynamicsDiagnostics& diagnostics);

/// Fewest-switches hop probabilities g_k out of the active surface.
Eigen::VectorXd hop_probabilities(const HamiltonianModel& model, const TrajectoryState& state,
                                  double dt, const DynamicsOptions& options,
                                  DynamicsDiagnostics& diagnostics);

/// Draw once against hop_probabilities; on a selected target rescale the
/// velocity along d to conserve energy, or record a frustrated hop.
std::optional<HopRecord> attempt_hop(const HamiltonianModel& model,
                                     const DynamicsOptions& options, TrajectoryState& state,
                                     Engine& rng, DynamicsDiagnostics& diagnostics);

struct Snapshot {
  double t = 0.0;
  Eigen::VectorXd positions;
  Eigen::VectorXd velocities;
  int surface = 0;
  Eigen::VectorXd adiabatic_populations;  // |c~_k|^2
  Eigen::VectorXd diabatic_populations;   // |c_j|^2
  double total_energy = 0.0;
};

struct TrajectoryResult {
  std::vector<Snapshot> snapshots;
  std::vector<HopRecord> hops;
  DynamicsDiagnostics diagnostics;
  bool aborted = false;
  double abort_time = 0.0;
};

/// Number of output frames (including t=0) for the given options.
int output_frame_count(const DynamicsOptions& options);

TrajectoryResult run_trajectory(const HamiltonianModel& model, const DynamicsOptions& options,
                                const Eigen::VectorXd& positions, const Eigen::VectorXd& velocities,
                                int initial_surface, Engine& rng);

}  // namespace rydagg
