#include "rydagg/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rydagg {

void Partition::validate(int n_atoms) const {
  if (a.empty() || b.empty()) throw std::invalid_argument("partition subsets must be non-empty");
  std::vector<int> seen(n_atoms, 0);
  for (const auto* set : {&a, &b}) {
    for (int atom : *set) {
      if (atom < 0 || atom >= n_atoms) throw std::invalid_argument("partition atom out of range");
      if (seen[atom]++) throw std::invalid_argument("partition subsets overlap");
    }
  }
  if (std::count(seen.begin(), seen.end(), 0) != 0) {
    throw std::invalid_argument("partition does not cover every atom");
  }
}

Eigen::VectorXd tensor_embed(const Eigen::VectorXd& phi_a, const Eigen::VectorXd& phi_b,
                             const Partition& partition, const ExcitationBasis& basis) {
  if (basis.excitations() != 2) throw std::invalid_argument("tensor_embed needs a q=2 basis");
  partition.validate(basis.n_atoms());
  if (phi_a.size() != static_cast<Eigen::Index>(partition.a.size()) ||
      phi_b.size() != static_cast<Eigen::Index>(partition.b.size())) {
    throw std::invalid_argument("sub-chain vector length does not match partition");
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t i = 0; i < partition.a.size(); ++i) {
    for (std::size_t j = 0; j < partition.b.size(); ++j) {
      const int n = partition.a[i];
      const int m = partition.b[j];
      const auto idx = basis.index_of(AtomTuple{std::min(n, m), std::max(n, m)});
      out[static_cast<Eigen::Index>(idx)] = phi_a[i] * phi_b[j];
    }
  }
  const double norm = out.norm();
  if (norm == 0.0) throw std::invalid_argument("sub-chain vectors have zero norm");
  return out / norm;
}

namespace {

Eigen::VectorXd subset_positions(const Eigen::VectorXd& geometry, const std::vector<int>& atoms) {
  Eigen::VectorXd r(static_cast<Eigen::Index>(atoms.size()));
  for (std::size_t i = 0; i < atoms.size(); ++i) r[i] = geometry[atoms[i]];
  return r;
}

ExcitonSpectrum trivial_spectrum(const Eigen::VectorXd& geometry) {
  ExcitonSpectrum s;
  s.energies = Eigen::VectorXd::Zero(1);
  s.vectors = Eigen::MatrixXd::Ones(1, 1);
  s.geometry = geometry;
  return s;
}

SubchainSpectrum solve_subchain(const Eigen::VectorXd& geometry, const std::vector<int>& atoms,
                                Couplings couplings) {
  SubchainSpectrum out;
  out.atoms = atoms;
  const Eigen::VectorXd r = subset_positions(geometry, atoms);
  const int n = static_cast<int>(atoms.size());
  if (n == 1) {
    out.single = trivial_spectrum(r);
  } else {
    out.single = diagonalize(build_hamiltonian(ExcitationBasis(n, 1), r, couplings), r);
  }
  if (n == 2) {
    out.inverted = trivial_spectrum(r);
  } else if (n > 2) {
    out.inverted = diagonalize(build_hamiltonian(ExcitationBasis(n, 2), r, couplings), r);
  }
  return out;
}

// Two-excitation eigenvector of a subset, written in the full basis.
Eigen::VectorXd embed_inverted(const Eigen::VectorXd& sub_vector, const std::vector<int>& atoms,
                               const ExcitationBasis& basis) {
  const int n = static_cast<int>(atoms.size());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.size()));
  if (n == 2) {
    out[static_cast<Eigen::Index>(basis.index_of({atoms[0], atoms[1]}))] = sub_vector[0];
    return out;
  }
  const ExcitationBasis sub(n, 2);
  for (std::size_t s = 0; s < sub.size(); ++s) {
    const auto& t = sub.tuple_of(s);
    out[static_cast<Eigen::Index>(basis.index_of({atoms[t[0]], atoms[t[1]]}))] =
        sub_vector[static_cast<Eigen::Index>(s)];
  }
  return out;
}

struct Candidate {
  Eigen::VectorXd vector;
  VerdictKind kind;
  char subset;
  int k_a;
  int k_b;
};

}  // namespace

int ProductDecomposition::count(VerdictKind kind, char subset) const {
  return static_cast<int>(std::count_if(verdicts.begin(), verdicts.end(), [&](const auto& v) {
    return v.kind == kind && (subset == '*' || v.subset == subset);
  }));
}

ProductDecomposition decompose_biexcitons(const ExcitonSpectrum& spectrum,
                                          const ExcitationBasis& basis, const Partition& partition,
                                          Couplings couplings, double threshold) {
  if (basis.excitations() != 2) throw std::invalid_argument("decomposition needs a q=2 spectrum");
  if (spectrum.size() != static_cast<Eigen::Index>(basis.size())) {
    throw std::invalid_argument("spectrum does not match basis");
  }
  if (spectrum.geometry.size() != basis.n_atoms()) {
    throw std::invalid_argument("spectrum carries no geometry");
  }
  partition.validate(basis.n_atoms());

  ProductDecomposition out;
  out.partition = partition;
  out.threshold = threshold;
  out.sub_a = solve_subchain(spectrum.geometry, partition.a, couplings);
  out.sub_b = solve_subchain(spectrum.geometry, partition.b, couplings);

  std::vector<Candidate> candidates;
  for (Eigen::Index ka = 0; ka < out.sub_a.single.size(); ++ka) {
    for (Eigen::Index kb = 0; kb < out.sub_b.single.size(); ++kb) {
      candidates.push_back({tensor_embed(out.sub_a.single.vector(ka), out.sub_b.single.vector(kb),
                                         partition, basis),
                            VerdictKind::product, '-', static_cast<int>(ka + 1),
                            static_cast<int>(kb + 1)});
    }
  }
  for (Eigen::Index k = 0; k < out.sub_a.inverted.size(); ++k) {
    candidates.push_back({embed_inverted(out.sub_a.inverted.vector(k), partition.a, basis),
                          VerdictKind::inverted, 'A', static_cast<int>(k + 1), 0});
  }
  for (Eigen::Index k = 0; k < out.sub_b.inverted.size(); ++k) {
    candidates.push_back({embed_inverted(out.sub_b.inverted.vector(k), partition.b, basis),
                          VerdictKind::inverted, 'B', 0, static_cast<int>(k + 1)});
  }

  // Degenerate clusters: a candidate's fidelity is its weight in the cluster
  // subspace, i.e. the best overlap any member of the cluster could have.
  const Eigen::Index n = spectrum.size();
  const double scale = std::max(1.0, spectrum.energies.cwiseAbs().maxCoeff());
  const double tol = 1e-9 * scale;
  for (Eigen::Index start = 0; start < n;) {
    Eigen::Index stop = start + 1;
    while (stop < n && spectrum.energies[stop] - spectrum.energies[stop - 1] <= tol) ++stop;
    const Eigen::MatrixXd cluster = spectrum.vectors.middleCols(start, stop - start);

    std::vector<std::pair<double, std::size_t>> ranked;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      ranked.emplace_back((cluster.transpose() * candidates[c].vector).squaredNorm(), c);
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& x, const auto& y) { return x.first > y.first; });

    for (Eigen::Index k = start; k < stop; ++k) {
      const auto& [fidelity, c] = ranked[static_cast<std::size_t>(k - start)];
      StateVerdict v;
      v.state = static_cast<int>(k + 1);
      v.energy = spectrum.energies[k];
      v.fidelity = std::clamp(fidelity, 0.0, 1.0);
      if (v.fidelity >= threshold) {
        v.kind = candidates[c].kind;
        v.subset = candidates[c].subset;
        v.k_a = candidates[c].k_a;
        v.k_b = candidates[c].k_b;
      }
      out.verdicts.push_back(v);
    }
    start = stop;
  }
  return out;
}

std::string to_string(VerdictKind kind) {
  switch (kind) {
    case VerdictKind::product: return "product";
    case VerdictKind::inverted: return "inverted";
    case VerdictKind::entangled: return "entangled";
  }
  return "unknown";
}

}  // namespace rydagg
