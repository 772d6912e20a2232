#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rydagg/basis.hpp"

namespace rydagg {

/// Interaction constants already converted to internal units
/// (c3 in rad/us um^3, c6 in rad/us um^6).
struct Couplings {
  double c3 = 0.0;
  double c6 = 0.0;
};

/// Electronic Hamiltonian of a 1D aggregate in a fixed excitation basis.
///
/// Two basis states couple iff their atom tuples differ in exactly one atom;
/// the matrix element is C3/R^3 between the two differing atoms. For q=2 this
/// is the four-delta rule (only one delta can fire for distinct sorted
/// pairs). The van-der-Waals term is state independent:
///   diag = -sum_{l<k} C6/R_lk^6,
/// which equals the ordered-pair sum with the 1/2 factor.
class HamiltonianModel {
 public:
  HamiltonianModel(ExcitationBasis basis, Couplings couplings);

  const ExcitationBasis& basis() const noexcept { return basis_; }
  const Couplings& couplings() const noexcept { return couplings_; }
  std::size_t dimension() const noexcept { return basis_.size(); }

  Eigen::MatrixXd matrix(const Eigen::VectorXd& positions) const;

  /// dH/dr_atom, entrywise.
  Eigen::MatrixXd gradient(const Eigen::VectorXd& positions, int atom) const;

  /// sum_a direction_a dH/dr_a.
  Eigen::MatrixXd directional_derivative(const Eigen::VectorXd& positions,
                                         const Eigen::VectorXd& direction) const;

  /// Component a of the result is <u| dH/dr_a |w> (real vectors).
  Eigen::VectorXd gradient_expectation(const Eigen::VectorXd& positions,
                                       const Eigen::VectorXd& u,
                                       const Eigen::VectorXd& w) const;

  /// Column c holds <u| dH/dr_a |w_c> over atoms a.
  Eigen::MatrixXd gradient_expectations(const Eigen::VectorXd& positions,
                                        const Eigen::VectorXd& u,
                                        const Eigen::MatrixXd& w) const;

  /// The constant diagonal (van-der-Waals) value at this geometry.
  double vdw_shift(const Eigen::VectorXd& positions) const;

 private:
  struct Hop {
    int row;
    int col;
    int from;  // atom that loses the excitation going row -> col
    int to;
  };

  void check_geometry(const Eigen::VectorXd& positions) const;

  ExcitationBasis basis_;
  Couplings couplings_;
  std::vector<Hop> hops_;
};

Eigen::MatrixXd build_hamiltonian(const ExcitationBasis& basis, const Eigen::VectorXd& positions,
                                  Couplings couplings);

Eigen::MatrixXd hamiltonian_gradient(const ExcitationBasis& basis, const Eigen::VectorXd& positions,
                                     Couplings couplings, int atom);

/// Smallest pairwise separation.
double min_separation(const Eigen::VectorXd& positions);

/// Aggregate lifetime from per-atom s and p lifetimes: (n_p/tau_p + n_s/tau_s)^-1.
double lifetime_estimate(double tau_s, double tau_p, int n_s, int n_p);

}  // namespace rydagg
