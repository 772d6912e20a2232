#include "rydagg/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <stdexcept>
#include <thread>

#include "rydagg/rng.hpp"
#include "rydagg/units.hpp"

namespace rydagg {

InitialSampler make_sampler(const Eigen::VectorXd& mean, double sigma, double mass_internal,
                            std::uint64_t seed) {
  if (sigma < 0.0) throw std::invalid_argument("sigma must be non-negative");
  InitialSampler s;
  s.mean = mean;
  s.sigma = sigma;
  s.sigma_v = sigma > 0.0 ? units::velocity_width(mass_internal, sigma) : 0.0;
  s.seed = seed;
  return s;
}

InitialCondition sample_initial(const InitialSampler& sampler, std::uint64_t index) {
  InitialCondition ic{sampler.mean, Eigen::VectorXd::Zero(sampler.mean.size())};
  if (sampler.sigma == 0.0) return ic;
  Engine engine = make_stream(sampler.seed, index, StreamPurpose::initial_conditions);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index a = 0; a < sampler.mean.size(); ++a) {
    ic.positions[a] += sampler.sigma * normal(engine);
  }
  for (Eigen::Index a = 0; a < sampler.mean.size(); ++a) {
    ic.velocities[a] = sampler.sigma_v * normal(engine);
  }
  return ic;
}

std::vector<InitialCondition> sample_initials(const InitialSampler& sampler, int n_traj) {
  if (n_traj < 1) throw std::invalid_argument("n_traj must be >= 1");
  std::vector<InitialCondition> out;
  out.reserve(static_cast<std::size_t>(n_traj));
  for (int i = 0; i < n_traj; ++i) out.push_back(sample_initial(sampler, static_cast<std::uint64_t>(i)));
  return out;
}

double excitation_weight(const Eigen::VectorXd& populations, const ExcitationBasis& basis, int atom) {
  double w = 0.0;
  for (std::size_t s : basis.states_with(atom)) w += populations[static_cast<Eigen::Index>(s)];
  return w;
}

double excitation_weight(const Eigen::VectorXcd& coeffs, const ExcitationBasis& basis, int atom) {
  return excitation_weight(Eigen::VectorXd(coeffs.cwiseAbs2()), basis, atom);
}

int ObservableGrid::bin_of(double r) const {
  const auto i = static_cast<long long>(std::floor((r - r0) / bin_width));
  return static_cast<int>(std::clamp<long long>(i, 0, n_r - 1));
}

ObservableGrid make_grid(const Eigen::VectorXd& positions, double bin_width, double frame_dt,
                         int n_frames, double margin) {
  if (!(bin_width > 0.0)) throw std::invalid_argument("bin width must be positive");
  ObservableGrid g;
  g.dt = frame_dt;
  g.n_t = n_frames;
  g.bin_width = bin_width;
  g.r0 = std::floor((positions.minCoeff() - margin) / bin_width) * bin_width;
  const double r1 = positions.maxCoeff() + margin;
  g.n_r = static_cast<int>(std::ceil((r1 - g.r0) / bin_width));
  return g;
}

EnsembleObservables::EnsembleObservables(ObservableGrid grid, int n_atoms, int n_excitations,
                                         int n_surfaces)
    : grid_(grid), n_atoms_(n_atoms), q_(n_excitations), n_surfaces_(n_surfaces) {
  const auto nt = static_cast<std::size_t>(grid_.n_t);
  e_sum_.assign(nt * grid_.n_r, 0.0);
  atom_density_sum_.assign(nt * n_atoms * grid_.n_r, 0.0);
  population_sum_.assign(nt * n_surfaces, 0.0);
  diabatic_sum_.assign(nt * n_surfaces, 0.0);
  surface_count_.assign(nt * n_surfaces, 0);
  atom_excitation_sum_.assign(nt * n_atoms, 0.0);
  position_sum_.assign(nt * n_atoms, 0.0);
}

void EnsembleObservables::add_trajectory(const TrajectoryResult& trajectory,
                                         const ExcitationBasis& basis) {
  if (static_cast<int>(trajectory.snapshots.size()) != grid_.n_t) {
    throw std::invalid_argument("trajectory frame count does not match the time grid");
  }
  for (int t = 0; t < grid_.n_t; ++t) {
    const Snapshot& s = trajectory.snapshots[static_cast<std::size_t>(t)];
    if (s.positions.size() != n_atoms_ || s.adiabatic_populations.size() != n_surfaces_) {
      throw std::invalid_argument("snapshot shape does not match observables");
    }
    for (int a = 0; a < n_atoms_; ++a) {
      const int bin = grid_.bin_of(s.positions[a]);
      const double w = excitation_weight(s.diabatic_populations, basis, a);
      e_sum_[idx_tr(t, bin)] += w;
      atom_density_sum_[(static_cast<std::size_t>(t) * n_atoms_ + a) * grid_.n_r + bin] += 1.0;
      atom_excitation_sum_[static_cast<std::size_t>(t) * n_atoms_ + a] += w;
      position_sum_[static_cast<std::size_t>(t) * n_atoms_ + a] += s.positions[a];
    }
    for (int k = 0; k < n_surfaces_; ++k) {
      population_sum_[static_cast<std::size_t>(t) * n_surfaces_ + k] += s.adiabatic_populations[k];
      diabatic_sum_[static_cast<std::size_t>(t) * n_surfaces_ + k] += s.diabatic_populations[k];
    }
    ++surface_count_[static_cast<std::size_t>(t) * n_surfaces_ + s.surface];
  }
  ++n_traj_;
}

void EnsembleObservables::merge(const EnsembleObservables& other) {
  if (!(grid_ == other.grid_) || n_atoms_ != other.n_atoms_ || n_surfaces_ != other.n_surfaces_ ||
      q_ != other.q_) {
    throw std::invalid_argument("cannot merge observables on different grids");
  }
  auto add = [](auto& into, const auto& from) {
    for (std::size_t i = 0; i < into.size(); ++i) into[i] += from[i];
  };
  add(e_sum_, other.e_sum_);
  add(atom_density_sum_, other.atom_density_sum_);
  add(population_sum_, other.population_sum_);
  add(diabatic_sum_, other.diabatic_sum_);
  add(surface_count_, other.surface_count_);
  add(atom_excitation_sum_, other.atom_excitation_sum_);
  add(position_sum_, other.position_sum_);
  n_traj_ += other.n_traj_;
}

double EnsembleObservables::e(int t, int r) const {
  if (n_traj_ == 0) return 0.0;
  return e_sum_[idx_tr(t, r)] / (static_cast<double>(n_traj_) * grid_.bin_width);
}

double EnsembleObservables::atom_density(int t, int atom, int r) const {
  if (n_traj_ == 0) return 0.0;
  return atom_density_sum_[(static_cast<std::size_t>(t) * n_atoms_ + atom) * grid_.n_r + r] /
         (static_cast<double>(n_traj_) * grid_.bin_width);
}

double EnsembleObservables::rho(int t, int r) const {
  double sum = 0.0;
  for (int a = 0; a < n_atoms_; ++a) sum += atom_density(t, a, r);
  return sum;
}

double EnsembleObservables::population(int t, int k) const {
  if (n_traj_ == 0) return 0.0;
  return population_sum_[static_cast<std::size_t>(t) * n_surfaces_ + k] / static_cast<double>(n_traj_);
}

double EnsembleObservables::diabatic_population(int t, int j) const {
  if (n_traj_ == 0) return 0.0;
  return diabatic_sum_[static_cast<std::size_t>(t) * n_surfaces_ + j] / static_cast<double>(n_traj_);
}

double EnsembleObservables::fraction(int t, int k) const {
  if (n_traj_ == 0) return 0.0;
  return static_cast<double>(surface_count_[static_cast<std::size_t>(t) * n_surfaces_ + k]) /
         static_cast<double>(n_traj_);
}

double EnsembleObservables::atom_excitation(int t, int atom) const {
  if (n_traj_ == 0) return 0.0;
  return atom_excitation_sum_[static_cast<std::size_t>(t) * n_atoms_ + atom] /
         static_cast<double>(n_traj_);
}

double EnsembleObservables::mean_position(int t, int atom) const {
  if (n_traj_ == 0) return 0.0;
  return position_sum_[static_cast<std::size_t>(t) * n_atoms_ + atom] / static_cast<double>(n_traj_);
}

double EnsembleObservables::e0() const {
  double best = 0.0;
  for (int t = 0; t < grid_.n_t; ++t)
    for (int r = 0; r < grid_.n_r; ++r) best = std::max(best, e(t, r));
  return best;
}

double EnsembleObservables::rho0() const {
  double best = 0.0;
  for (int t = 0; t < grid_.n_t; ++t)
    for (int r = 0; r < grid_.n_r; ++r) best = std::max(best, rho(t, r));
  return best;
}

namespace {

struct BlockResult {
  EnsembleObservables observables;
  std::vector<TrajectoryHop> hops;
  int aborted = 0;
  DynamicsDiagnostics diagnostics;
};

void fold(DynamicsDiagnostics& into, const DynamicsDiagnostics& d) {
  into.degenerate_couplings += d.degenerate_couplings;
  into.renormalizations += d.renormalizations;
  into.low_overlap_steps += d.low_overlap_steps;
  into.min_gauge_overlap = std::min(into.min_gauge_overlap, d.min_gauge_overlap);
  into.max_energy_drift = std::max(into.max_energy_drift, d.max_energy_drift);
  into.max_norm_error = std::max(into.max_norm_error, d.max_norm_error);
}

}  // namespace

EnsembleResult run_ensemble(const HamiltonianModel& model, const DynamicsOptions& dynamics,
                            const Eigen::VectorXd& mean, int initial_surface, double bin_width,
                            const EnsembleOptions& options) {
  if (options.n_traj < 1) throw std::invalid_argument("n_traj must be >= 1");
  if (options.block_size < 1) throw std::invalid_argument("block size must be >= 1");
  const int frames = output_frame_count(dynamics);
  const ObservableGrid grid = make_grid(mean, bin_width, dynamics.output_stride, frames);
  const int n_atoms = static_cast<int>(mean.size());
  const int n_surfaces = static_cast<int>(model.dimension());
  const InitialSampler sampler = make_sampler(mean, options.sigma, dynamics.mass, options.seed);

  const int n_blocks = (options.n_traj + options.block_size - 1) / options.block_size;
  std::vector<BlockResult> blocks(static_cast<std::size_t>(n_blocks));
  std::atomic<int> next_block{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    try {
    for (int b = next_block++; b < n_blocks; b = next_block++) {
      BlockResult block{EnsembleObservables(grid, n_atoms, model.basis().excitations(), n_surfaces),
                        {}, 0, {}};
      const int first = b * options.block_size;
      const int last = std::min(options.n_traj, first + options.block_size);
      for (int i = first; i < last; ++i) {
        const InitialCondition ic = sample_initial(sampler, static_cast<std::uint64_t>(i));
        Engine rng = make_stream(options.seed, static_cast<std::uint64_t>(i), StreamPurpose::hopping);
        const TrajectoryResult tr =
            run_trajectory(model, dynamics, ic.positions, ic.velocities, initial_surface, rng);
        fold(block.diagnostics, tr.diagnostics);
        if (tr.aborted) {
          ++block.aborted;
          continue;
        }
        block.observables.add_trajectory(tr, model.basis());
        for (const auto& hop : tr.hops) block.hops.push_back({i, hop});
      }
      blocks[static_cast<std::size_t>(b)] = std::move(block);
    }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next_block = n_blocks;
    }
  };

  const int n_workers = std::max(1, std::min(options.n_workers, n_blocks));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  EnsembleResult result{EnsembleObservables(grid, n_atoms, model.basis().excitations(), n_surfaces),
                        {}, 0, {}};
  for (auto& block : blocks) {
    result.observables.merge(block.observables);
    result.hops.insert(result.hops.end(), block.hops.begin(), block.hops.end());
    result.aborted += block.aborted;
    fold(result.diagnostics, block.diagnostics);
  }
  return result;
}

}  // namespace rydagg
