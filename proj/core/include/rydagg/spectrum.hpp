#pragma once

#include <Eigen/Dense>

namespace rydagg {

/// Eigen-decomposition of an electronic Hamiltonian: the Born-Oppenheimer
/// energies at one geometry, ascending, with eigenvectors as columns.
/// Every column's largest-magnitude entry (the first, on ties) is positive unless the spectrum
/// came out of align_gauge, which trades that rule for continuity.
struct ExcitonSpectrum {
  Eigen::VectorXd energies;
  Eigen::MatrixXd vectors;
  Eigen::VectorXd geometry;

  Eigen::Index size() const noexcept { return energies.size(); }
  auto vector(Eigen::Index k) const { return vectors.col(k); }
};

/// Throws std::invalid_argument for a non-symmetric matrix.
ExcitonSpectrum diagonalize(const Eigen::MatrixXd& hamiltonian,
                            const Eigen::VectorXd& geometry = Eigen::VectorXd());

struct GaugeAlignment {
  ExcitonSpectrum spectrum;
  double min_overlap = 1.0;  // min_k |<prev_k|cur_k>| after alignment
  int flips = 0;
  bool degenerate = false;   // adjacent energies closer than the tolerance
};

/// Flip signs so each vector overlaps positively with the same-index vector
/// of `previous`. Energy ordering is never changed.
GaugeAlignment align_gauge(const ExcitonSpectrum& current, const ExcitonSpectrum& previous,
                           double degeneracy_tolerance = 1e-6);

}  // namespace rydagg
