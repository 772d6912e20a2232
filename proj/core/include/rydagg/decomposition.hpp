#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "rydagg/basis.hpp"
#include "rydagg/hamiltonian.hpp"
#include "rydagg/spectrum.hpp"

namespace rydagg {

/// Split of the chain into two disjoint atom sets (0-based, ascending).
struct Partition {
  std::vector<int> a;
  std::vector<int> b;

  /// Throws std::invalid_argument unless a and b are disjoint, non-empty and
  /// cover 0..n_atoms-1.
  void validate(int n_atoms) const;
};

/// Bi-exciton vector with one excitation in A and one in B,
/// c_{nm} = phi_a(n) phi_b(m), normalized.
Eigen::VectorXd tensor_embed(const Eigen::VectorXd& phi_a, const Eigen::VectorXd& phi_b,
                             const Partition& partition, const ExcitationBasis& basis);

enum class VerdictKind { product, inverted, entangled };

/// Classification of one bi-exciton eigenstate.
///  - product:   phi_A(k_a) (x) phi_B(k_b)
///  - inverted:  both excitations inside one subset; `subset` is 'A' or 'B'
///               and the matching index sits in k_a or k_b. For a two-atom
///               subset this is the doubly-excited |pp> state.
///  - entangled: nothing reached the threshold; fidelity is the best found.
/// Indices are 1-based; 0 means "not applicable".
struct StateVerdict {
  int state = 0;
  double energy = 0.0;
  VerdictKind kind = VerdictKind::entangled;
  char subset = '-';
  int k_a = 0;
  int k_b = 0;
  double fidelity = 0.0;
};

struct SubchainSpectrum {
  std::vector<int> atoms;
  ExcitonSpectrum single;    // one excitation on the subset
  ExcitonSpectrum inverted;  // two excitations on the subset (empty if |S| < 2)
};

struct ProductDecomposition {
  Partition partition;
  double threshold = 0.99;
  SubchainSpectrum sub_a;
  SubchainSpectrum sub_b;
  std::vector<StateVerdict> verdicts;

  int count(VerdictKind kind, char subset = '*') const;
};

/// Scan every bi-exciton eigenvector of `spectrum` against products of
/// isolated sub-chain excitons and against two-excitation states confined
/// to either subset. Sub-problems use only intra-subset couplings.
ProductDecomposition decompose_biexcitons(const ExcitonSpectrum& spectrum,
                                          const ExcitationBasis& basis, const Partition& partition,
                                          Couplings couplings, double threshold = 0.99);

std::string to_string(VerdictKind kind);

}  // namespace rydagg
