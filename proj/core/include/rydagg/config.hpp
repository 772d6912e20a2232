#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rydagg/decomposition.hpp"
#include "rydagg/dynamics.hpp"
#include "rydagg/hamiltonian.hpp"

namespace rydagg {

/// Everything needed to reproduce a run, in user-facing units. Atom indices
/// are 1-based here, as in every file the tools read or write.
struct AggregateConfig {
  std::string name = "custom";
  int n_atoms = 5;
  int n_excitations = 2;
  std::vector<double> positions_um;
  double c3_mhz_um3 = 976.0;
  /// Enters the diagonal as -C6/R^6; a negative value gives a repulsive wall.
  double c6_mhz_um6 = -5400.0;
  double mass_kg = 1e-26;
  double sigma_um = 0.3;
  int n_traj = 2000;
  double dt_us = 1e-4;
  int n_sub_electronic = 10;
  double t_final_us = 1.5;
  double output_stride_us = 1e-2;
  int initial_surface = 1;
  Mode mode = Mode::fssh;
  bool freeze_coefficients = false;
  bool reverse_on_frustrated = false;
  double bin_width_um = 0.25;
  std::uint64_t rng_seed = 20190101;
  double eps_degenerate = 1e-6;
  double d_max = 1e6;
  double r_min_um = 0.1;
  std::vector<int> partition_a = {1, 2, 3};

  /// Throws ConfigError naming the offending field.
  void validate() const;

  Couplings couplings() const;
  double mass() const;
  DynamicsOptions dynamics() const;
  Eigen::VectorXd positions() const;
  Partition partition() const;
};

std::string to_string(Mode mode);
Mode parse_mode(const std::string& text);

/// Flat "key = value" text, '#' starts a comment. Keys carry their units.
/// `base` supplies defaults for keys the text does not set. A chain may be
/// given as `positions_um = 0, 5, ...` or as `geometry` (regular,
/// dislocated-end, dislocated-start, doubly-dislocated) with `d_um`/`a_um`.
AggregateConfig parse_config(std::istream& in, AggregateConfig base = {});

/// Value of a top-level `scenario = <name>` line, or empty.
std::string scenario_key(std::istream& in);

/// Lossless: parse_config(serialize_config(c)) == c field by field.
std::string serialize_config(const AggregateConfig& config);

/// Chain geometries used by the built-in scenarios (first atom at 0).
std::vector<double> regular_chain(int n, double d);
/// Last pair spaced a, the rest d.
std::vector<double> dislocated_end_chain(int n, double d, double a);
/// First pair spaced a, the rest d.
std::vector<double> dislocated_start_chain(int n, double d, double a);
/// First and last pair spaced a.
std::vector<double> doubly_dislocated_chain(int n, double d, double a);

}  // namespace rydagg
