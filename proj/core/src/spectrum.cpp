#include "rydagg/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace rydagg {

namespace {

Eigen::Index dominant_index(const Eigen::VectorXd& v) {
  const double peak = v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) >= peak * (1.0 - 1e-9)) return i;
  }
  return 0;
}

}  // namespace

ExcitonSpectrum diagonalize(const Eigen::MatrixXd& h, const Eigen::VectorXd& geometry) {
  if (h.rows() != h.cols() || h.rows() == 0) {
    throw std::invalid_argument("Hamiltonian must be a non-empty square matrix");
  }
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if ((h - h.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument("Hamiltonian is not symmetric");
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");

  const Eigen::Index n = h.rows();
  Eigen::MatrixXd vectors = solver.eigenvectors();
  std::vector<Eigen::Index> dominant(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::VectorXd v = vectors.col(k);
    dominant[k] = dominant_index(v);
    if (v[dominant[k]] < 0.0) vectors.col(k) = -v;
  }

  // Within clusters of (numerically) equal energies order by dominant index.
  const Eigen::VectorXd& values = solver.eigenvalues();
  const double tol = 1e-10 * scale;
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (Eigen::Index start = 0; start < n;) {
    Eigen::Index stop = start + 1;
    while (stop < n && values[stop] - values[stop - 1] <= tol) ++stop;
    std::stable_sort(order.begin() + start, order.begin() + stop,
                     [&](Eigen::Index a, Eigen::Index b) { return dominant[a] < dominant[b]; });
    start = stop;
  }

  ExcitonSpectrum out;
  out.energies.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.energies[k] = values[order[k]];
    out.vectors.col(k) = vectors.col(order[k]);
  }
  out.geometry = geometry;
  return out;
}

GaugeAlignment align_gauge(const ExcitonSpectrum& current, const ExcitonSpectrum& previous,
                           double degeneracy_tolerance) {
  if (current.size() != previous.size()) {
    throw std::invalid_argument("spectra of different dimension");
  }
  GaugeAlignment out{current, 1.0, 0, false};
  for (Eigen::Index k = 0; k < current.size(); ++k) {
    const double overlap = previous.vectors.col(k).dot(current.vectors.col(k));
    if (overlap < 0.0) {
      out.spectrum.vectors.col(k) *= -1.0;
      ++out.flips;
    }
    out.min_overlap = std::min(out.min_overlap, std::abs(overlap));
    if (k > 0 && current.energies[k] - current.energies[k - 1] < degeneracy_tolerance) {
      out.degenerate = true;
    }
  }
  return out;
}

}  // namespace rydagg
