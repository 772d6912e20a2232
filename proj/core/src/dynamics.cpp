#include "rydagg/dynamics.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include "rydagg/errors.hpp"

namespace rydagg {

namespace {

using cd = std::complex<double>;

void check_surface(const ExcitonSpectrum& spectrum, int surface) {
  if (surface < 0 || surface >= spectrum.size()) {
    throw std::invalid_argument("surface index " + std::to_string(surface + 1) + " out of range");
  }
}

long long checked_step_count(double span, double dt, const char* what) {
  const long long n = std::llround(span / dt);
  if (n < 1 || std::abs(static_cast<double>(n) * dt - span) > 1e-9 * std::max(1.0, span)) {
    throw std::invalid_argument(std::string(what) + " must be a positive multiple of dt");
  }
  return n;
}

void track_energy(const TrajectoryState& state, double mass, double reference,
                  DynamicsDiagnostics& diagnostics) {
  const double e = state.total_energy(mass);
  const double scale = std::abs(reference) > 0.0 ? std::abs(reference) : 1.0;
  diagnostics.max_energy_drift = std::max(diagnostics.max_energy_drift, std::abs(e - reference) / scale);
}

Snapshot take_snapshot(const TrajectoryState& state, double mass) {
  Snapshot s;
  s.t = state.t;
  s.positions = state.positions;
  s.velocities = state.velocities;
  s.surface = state.surface;
  s.adiabatic_populations = state.adiabatic_amplitudes().cwiseAbs2();
  s.diabatic_populations = state.coeffs.cwiseAbs2();
  s.total_energy = state.total_energy(mass);
  return s;
}

Eigen::VectorXd coupling_from_numerator(const Eigen::VectorXd& numerator, double gap,
                                        double eps_degenerate, double d_max, bool* capped) {
  if (capped) *capped = false;
  if (std::abs(gap) >= eps_degenerate) return numerator / gap;

  if (capped) *capped = true;
  Eigen::VectorXd out(numerator.size());
  for (Eigen::Index a = 0; a < numerator.size(); ++a) {
    if (numerator[a] == 0.0) {
      out[a] = 0.0;
    } else if (gap == 0.0 || std::abs(numerator[a] / gap) > d_max) {
      const double s = (numerator[a] > 0.0) == (gap >= 0.0) ? 1.0 : -1.0;
      out[a] = s * d_max;
    } else {
      out[a] = numerator[a] / gap;
    }
  }
  return out;
}

}  // namespace

Eigen::VectorXcd TrajectoryState::adiabatic_amplitudes() const {
  return spectrum.vectors.transpose().cast<cd>() * coeffs;
}

Eigen::VectorXd surface_force(const HamiltonianModel& model, const ExcitonSpectrum& spectrum,
                              int surface) {
  check_surface(spectrum, surface);
  const Eigen::VectorXd v = spectrum.vector(surface);
  return -model.gradient_expectation(spectrum.geometry, v, v);
}

Eigen::VectorXd nonadiabatic_coupling(const HamiltonianModel& model,
                                      const ExcitonSpectrum& spectrum, int k, int i,
                                      double eps_degenerate, double d_max, bool* capped) {
  check_surface(spectrum, k);
  check_surface(spectrum, i);
  if (k == i) throw std::invalid_argument("non-adiabatic coupling needs two distinct surfaces");
  return coupling_from_numerator(
      model.gradient_expectation(spectrum.geometry, spectrum.vector(k), spectrum.vector(i)),
      spectrum.energies[i] - spectrum.energies[k], eps_degenerate, d_max, capped);
}

TrajectoryState prepare_state(const HamiltonianModel& model, const Eigen::VectorXd& positions,
                              const Eigen::VectorXd& velocities, int surface) {
  TrajectoryState state;
  state.positions = positions;
  state.velocities = velocities;
  state.hamiltonian = model.matrix(positions);
  state.spectrum = diagonalize(state.hamiltonian, positions);
  check_surface(state.spectrum, surface);
  state.surface = surface;
  state.coeffs = state.spectrum.vector(surface).cast<cd>();
  state.force = surface_force(model, state.spectrum, surface);
  return state;
}

Eigen::MatrixXd step_nuclear(const HamiltonianModel& model, const DynamicsOptions& options,
                             TrajectoryState& state, DynamicsDiagnostics& diagnostics) {
  const double dt = options.dt;
  const double inv_mass = 1.0 / options.mass;
  Eigen::MatrixXd h_begin = state.hamiltonian;
  const Eigen::VectorXd force_old = state.force;

  state.positions += state.velocities * dt + 0.5 * dt * dt * inv_mass * force_old;
  if (min_separation(state.positions) < options.r_min) {
    throw TrajectoryAborted("atoms closer than r_min", state.t + dt);
  }
  state.hamiltonian = model.matrix(state.positions);
  const auto aligned = align_gauge(diagonalize(state.hamiltonian, state.positions), state.spectrum,
                                   options.eps_degenerate);
  state.spectrum = aligned.spectrum;
  diagnostics.min_gauge_overlap = std::min(diagnostics.min_gauge_overlap, aligned.min_overlap);
  if (aligned.min_overlap < 0.9) ++diagnostics.low_overlap_steps;

  state.force = surface_force(model, state.spectrum, state.surface);
  state.velocities += 0.5 * dt * inv_mass * (force_old + state.force);
  state.t += dt;
  return h_begin;
}

namespace {

// Columns hold Re c and Im c, so -iHc becomes (H Im c, -H Re c) with real products only.
using Split = Eigen::Matrix<double, Eigen::Dynamic, 2>;

Split split(const Eigen::VectorXcd& c) {
  Split x(c.size(), 2);
  x.col(0) = c.real();
  x.col(1) = c.imag();
  return x;
}

Eigen::VectorXcd join(const Split& x) {
  Eigen::VectorXcd c(x.rows());
  c.real() = x.col(0);
  c.imag() = x.col(1);
  return c;
}

struct RkWork {
  Split k1, k2, k3, k4, tmp;
  Eigen::MatrixXd h_mid;
};

void rhs(const Eigen::MatrixXd& h, const Split& x, Split& out) {
  out.noalias() = h.lazyProduct(x);
  out.col(0).swap(out.col(1));
  out.col(1) = -out.col(1);
}

void rk4_split(Split& x, const Eigen::MatrixXd& h_begin, const Eigen::MatrixXd& h_end, double dt_sub,
               RkWork& w) {
  w.h_mid = 0.5 * (h_begin + h_end);
  rhs(h_begin, x, w.k1);
  w.tmp = x + 0.5 * dt_sub * w.k1;
  rhs(w.h_mid, w.tmp, w.k2);
  w.tmp = x + 0.5 * dt_sub * w.k2;
  rhs(w.h_mid, w.tmp, w.k3);
  w.tmp = x + dt_sub * w.k3;
  rhs(h_end, w.tmp, w.k4);
  x += (dt_sub / 6.0) * (w.k1 + 2.0 * w.k2 + 2.0 * w.k3 + w.k4);
}

}  // namespace

Eigen::VectorXcd step_electronic(const Eigen::VectorXcd& c, const Eigen::MatrixXd& h_begin,
                                 const Eigen::MatrixXd& h_end, double dt_sub) {
  Split x = split(c);
  RkWork w;
  rk4_split(x, h_begin, h_end, dt_sub, w);
  return join(x);
}

void propagate_electronic(Eigen::VectorXcd& coeffs, const Eigen::MatrixXd& h_begin,
                          const Eigen::MatrixXd& h_end, double dt, int n_sub,
                          DynamicsDiagnostics& diagnostics) {
  const double dt_sub = dt / n_sub;
  const Eigen::MatrixXd delta = h_end - h_begin;
  Split x = split(coeffs);
  RkWork w;
  Eigen::MatrixXd a = h_begin;
  Eigen::MatrixXd b(h_begin.rows(), h_begin.cols());
  for (int s = 0; s < n_sub; ++s) {
    b = h_begin + delta * (static_cast<double>(s + 1) / n_sub);
    rk4_split(x, a, b, dt_sub, w);
    a.swap(b);
  }
  coeffs = join(x);
  const double norm = coeffs.norm();
  diagnostics.max_norm_error = std::max(diagnostics.max_norm_error, std::abs(norm - 1.0));
  if (std::abs(norm - 1.0) > 1e-10) {
    coeffs /= norm;
    ++diagnostics.renormalizations;
  }
}

Eigen::VectorXd hop_probabilities(const HamiltonianModel& model, const TrajectoryState& state,
                                  double dt, const DynamicsOptions& options,
                                  DynamicsDiagnostics& diagnostics) {
  const Eigen::Index n = state.spectrum.size();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
  const Eigen::VectorXcd amp = state.adiabatic_amplitudes();
  const int gamma = state.surface;
  const double a_gg = std::norm(amp[gamma]);
  if (a_gg <= 0.0) return g;
  const ExcitonSpectrum& spec = state.spectrum;
  const Eigen::MatrixXd numerators =
      model.gradient_expectations(spec.geometry, spec.vector(gamma), spec.vectors);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (k == gamma) continue;
    bool capped = false;
    const Eigen::VectorXd d = coupling_from_numerator(
        numerators.col(k), spec.energies[k] - spec.energies[gamma], options.eps_degenerate,
        options.d_max, &capped);
    if (capped) ++diagnostics.degenerate_couplings;
    // Population flowing gamma -> k is 2 Re(c~_gamma^* c~_k) (v . d_gamma,k).
    const double flow = 2.0 * (std::conj(amp[gamma]) * amp[k]).real() * state.velocities.dot(d);
    g[k] = std::max(0.0, dt * flow / a_gg);
  }
  return g;
}

std::optional<HopRecord> attempt_hop(const HamiltonianModel& model,
                                     const DynamicsOptions& options, TrajectoryState& state,
                                     Engine& rng, DynamicsDiagnostics& diagnostics) {
  const Eigen::VectorXd g = hop_probabilities(model, state, options.dt, options, diagnostics);
  const double draw = uniform01(rng);
  int target = -1;
  double cumulative = 0.0;
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    if (g[k] <= 0.0) continue;
    cumulative += g[k];
    if (draw < cumulative) {
      target = static_cast<int>(k);
      break;
    }
  }
  if (target < 0) return std::nullopt;

  HopRecord record;
  record.t = state.t;
  record.from = state.surface;
  record.to = target;

  const Eigen::VectorXd d = nonadiabatic_coupling(model, state.spectrum, state.surface, target,
                                                  options.eps_degenerate, options.d_max);
  const double gap = state.spectrum.energies[target] - state.spectrum.energies[state.surface];
  // Solve 1/2 M |v - alpha d|^2 = 1/2 M |v|^2 - gap for the smaller |alpha|.
  const double qa = 0.5 * options.mass * d.squaredNorm();
  const double qb = options.mass * state.velocities.dot(d);
  const double disc = qb * qb - 4.0 * qa * gap;
  if (qa <= 0.0 || disc < 0.0) {
    record.frustrated = true;
    if (options.reverse_on_frustrated && qa > 0.0) {
      const Eigen::VectorXd unit = d.normalized();
      state.velocities -= 2.0 * state.velocities.dot(unit) * unit;
    }
    return record;
  }
  const double root = std::sqrt(disc);
  const double alpha = qb >= 0.0 ? (qb - root) / (2.0 * qa) : (qb + root) / (2.0 * qa);
  const double kinetic_before = state.kinetic_energy(options.mass);
  state.velocities -= alpha * d;
  state.surface = target;
  state.force = surface_force(model, state.spectrum, target);
  record.accepted = true;
  record.kinetic_adjustment = state.kinetic_energy(options.mass) - kinetic_before;
  return record;
}

int output_frame_count(const DynamicsOptions& options) {
  const long long steps = checked_step_count(options.t_final, options.dt, "t_final");
  const long long stride = checked_step_count(options.output_stride, options.dt, "output stride");
  if (steps % stride != 0) throw std::invalid_argument("t_final must be a multiple of the output stride");
  return static_cast<int>(steps / stride) + 1;
}

TrajectoryResult run_trajectory(const HamiltonianModel& model, const DynamicsOptions& options,
                                const Eigen::VectorXd& positions, const Eigen::VectorXd& velocities,
                                int initial_surface, Engine& rng) {
  if (!(options.mass > 0.0)) throw std::invalid_argument("mass must be positive");
  if (options.n_sub_electronic < 1) throw std::invalid_argument("n_sub_electronic must be >= 1");
  const int frames = output_frame_count(options);
  const long long stride = std::llround(options.output_stride / options.dt);
  const long long steps = stride * (frames - 1);

  TrajectoryResult result;
  result.snapshots.reserve(static_cast<std::size_t>(frames));
  TrajectoryState state = prepare_state(model, positions, velocities, initial_surface);
  double reference_energy = state.total_energy(options.mass);
  result.snapshots.push_back(take_snapshot(state, options.mass));

  const bool electronic =
      options.mode == Mode::fssh || !options.freeze_coefficients;
  try {
    for (long long step = 1; step <= steps; ++step) {
      const Eigen::MatrixXd h_begin = step_nuclear(model, options, state, result.diagnostics);
      if (electronic) {
        propagate_electronic(state.coeffs, h_begin, state.hamiltonian, options.dt,
                             options.n_sub_electronic, result.diagnostics);
      }
      track_energy(state, options.mass, reference_energy, result.diagnostics);
      if (options.mode == Mode::fssh) {
        if (auto hop = attempt_hop(model, options, state, rng, result.diagnostics)) {
          if (hop->accepted) reference_energy = state.total_energy(options.mass);
          result.hops.push_back(*hop);
        }
      }
      // Exact step count, not accumulated float time, decides output frames.
      state.t = static_cast<double>(step) * options.dt;
      if (step % stride == 0) result.snapshots.push_back(take_snapshot(state, options.mass));
    }
  } catch (const TrajectoryAborted& e) {
    result.aborted = true;
    result.abort_time = e.time();
  }
  return result;
}

}  // namespace rydagg
