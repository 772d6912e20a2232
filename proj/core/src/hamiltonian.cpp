#include "rydagg/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rydagg/errors.hpp"

namespace rydagg {

namespace {

constexpr double kCoincident = 1e-9;  // um

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

double min_separation(const Eigen::VectorXd& positions) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < positions.size(); ++i) {
    for (Eigen::Index j = i + 1; j < positions.size(); ++j) {
      best = std::min(best, std::abs(positions[i] - positions[j]));
    }
  }
  return best;
}

HamiltonianModel::HamiltonianModel(ExcitationBasis basis, Couplings couplings)
    : basis_(std::move(basis)), couplings_(couplings) {
  const auto& states = basis_.states();
  for (std::size_t i = 0; i < states.size(); ++i) {
    for (std::size_t j = i + 1; j < states.size(); ++j) {
      const auto& a = states[i];
      const auto& b = states[j];
      // Atoms in a but not b, and in b but not a (both tuples sorted).
      int only_a = -1, only_b = -1, diff_a = 0, diff_b = 0;
      for (int x : a) {
        if (std::find(b.begin(), b.end(), x) == b.end()) { only_a = x; ++diff_a; }
      }
      for (int x : b) {
        if (std::find(a.begin(), a.end(), x) == a.end()) { only_b = x; ++diff_b; }
      }
      if (diff_a == 1 && diff_b == 1) {
        hops_.push_back({static_cast<int>(i), static_cast<int>(j), only_a, only_b});
      }
    }
  }
}

void HamiltonianModel::check_geometry(const Eigen::VectorXd& positions) const {
  if (positions.size() != basis_.n_atoms()) {
    throw std::invalid_argument("geometry has " + std::to_string(positions.size()) +
                                " atoms, basis expects " + std::to_string(basis_.n_atoms()));
  }
  if (min_separation(positions) < kCoincident) {
    throw SingularGeometry("coincident atom positions");
  }
}

double HamiltonianModel::vdw_shift(const Eigen::VectorXd& r) const {
  double shift = 0.0;
  for (Eigen::Index l = 0; l < r.size(); ++l) {
    for (Eigen::Index k = l + 1; k < r.size(); ++k) {
      const double d2 = (r[l] - r[k]) * (r[l] - r[k]);
      shift -= couplings_.c6 / (d2 * d2 * d2);
    }
  }
  return shift;
}

Eigen::MatrixXd HamiltonianModel::matrix(const Eigen::VectorXd& r) const {
  check_geometry(r);
  const auto n = static_cast<Eigen::Index>(dimension());
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n) * vdw_shift(r);
  for (const auto& hop : hops_) {
    const double dist = std::abs(r[hop.from] - r[hop.to]);
    const double v = couplings_.c3 / (dist * dist * dist);
    h(hop.row, hop.col) = v;
    h(hop.col, hop.row) = v;
  }
  return h;
}

Eigen::MatrixXd HamiltonianModel::gradient(const Eigen::VectorXd& r, int atom) const {
  Eigen::VectorXd direction = Eigen::VectorXd::Zero(r.size());
  if (atom < 0 || atom >= r.size()) throw std::invalid_argument("atom index out of range");
  direction[atom] = 1.0;
  return directional_derivative(r, direction);
}

Eigen::MatrixXd HamiltonianModel::directional_derivative(const Eigen::VectorXd& r,
                                                         const Eigen::VectorXd& dir) const {
  check_geometry(r);
  const auto n = static_cast<Eigen::Index>(dimension());
  double diag = 0.0;
  for (Eigen::Index l = 0; l < r.size(); ++l) {
    for (Eigen::Index k = l + 1; k < r.size(); ++k) {
      const double x = r[l] - r[k];
      const double dist = std::abs(x);
      // d/dr_l of -C6/|r_l - r_k|^6
      const double dl = 6.0 * couplings_.c6 * sign(x) / std::pow(dist, 7);
      diag += dl * (dir[l] - dir[k]);
    }
  }
  Eigen::MatrixXd g = Eigen::MatrixXd::Identity(n, n) * diag;
  for (const auto& hop : hops_) {
    const double x = r[hop.from] - r[hop.to];
    const double dist = std::abs(x);
    // d/dr_from of C3/|r_from - r_to|^3
    const double d_from = -3.0 * couplings_.c3 * sign(x) / std::pow(dist, 4);
    const double v = d_from * (dir[hop.from] - dir[hop.to]);
    g(hop.row, hop.col) = v;
    g(hop.col, hop.row) = v;
  }
  return g;
}

Eigen::VectorXd HamiltonianModel::gradient_expectation(const Eigen::VectorXd& r,
                                                       const Eigen::VectorXd& u,
                                                       const Eigen::VectorXd& w) const {
  return gradient_expectations(r, u, w).col(0);
}

Eigen::MatrixXd HamiltonianModel::gradient_expectations(const Eigen::VectorXd& r,
                                                        const Eigen::VectorXd& u,
                                                        const Eigen::MatrixXd& w) const {
  check_geometry(r);
  if (u.size() != static_cast<Eigen::Index>(dimension()) || w.rows() != u.size()) {
    throw std::invalid_argument("state vectors do not match the basis dimension");
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(r.size(), w.cols());
  const Eigen::RowVectorXd overlap = u.transpose() * w;
  for (Eigen::Index l = 0; l < r.size(); ++l) {
    for (Eigen::Index k = l + 1; k < r.size(); ++k) {
      const double x = r[l] - r[k];
      const double x2 = x * x;
      // d/dr_l of -C6/x^6
      const double dl = 6.0 * couplings_.c6 / (x2 * x2 * x2 * x);
      out.row(l) += dl * overlap;
      out.row(k) -= dl * overlap;
    }
  }
  for (const auto& hop : hops_) {
    const double x = r[hop.from] - r[hop.to];
    const double x2 = x * x;
    // d/dr_from of C3/|x|^3
    const double d_from = -3.0 * couplings_.c3 * sign(x) / (x2 * x2);
    for (Eigen::Index c = 0; c < w.cols(); ++c) {
      const double weight = u[hop.row] * w(hop.col, c) + u[hop.col] * w(hop.row, c);
      out(hop.from, c) += d_from * weight;
      out(hop.to, c) -= d_from * weight;
    }
  }
  return out;
}

Eigen::MatrixXd build_hamiltonian(const ExcitationBasis& basis, const Eigen::VectorXd& positions,
                                  Couplings couplings) {
  return HamiltonianModel(basis, couplings).matrix(positions);
}

Eigen::MatrixXd hamiltonian_gradient(const ExcitationBasis& basis, const Eigen::VectorXd& positions,
                                     Couplings couplings, int atom) {
  return HamiltonianModel(basis, couplings).gradient(positions, atom);
}

double lifetime_estimate(double tau_s, double tau_p, int n_s, int n_p) {
  if (!(tau_s > 0.0) || !(tau_p > 0.0)) throw std::invalid_argument("lifetimes must be positive");
  if (n_s < 0 || n_p < 0 || n_s + n_p == 0) {
    throw std::invalid_argument("atom counts must be non-negative and not both zero");
  }
  return 1.0 / (n_p / tau_p + n_s / tau_s);
}

}  // namespace rydagg
