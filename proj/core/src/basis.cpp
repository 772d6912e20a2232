#include "rydagg/basis.hpp"

#include <algorithm>
#include <stdexcept>

namespace rydagg {

std::size_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::size_t result = 1;
  for (int i = 1; i <= k; ++i) result = result * static_cast<std::size_t>(n - k + i) / i;
  return result;
}

ExcitationBasis::ExcitationBasis(int n_atoms, int q) : n_atoms_(n_atoms), q_(q) {
  if (q < 1 || q >= n_atoms) {
    throw std::invalid_argument("excitation count must satisfy 1 <= q < n_atoms (got q=" +
                                std::to_string(q) + ", n=" + std::to_string(n_atoms) + ")");
  }
  states_.reserve(binomial(n_atoms, q));
  AtomTuple current(q);
  for (int i = 0; i < q; ++i) current[i] = i;
  // Odometer over sorted tuples; yields lexicographic order directly.
  while (true) {
    states_.push_back(current);
    int pos = q - 1;
    while (pos >= 0 && current[pos] == n_atoms - q + pos) --pos;
    if (pos < 0) break;
    ++current[pos];
    for (int j = pos + 1; j < q; ++j) current[j] = current[j - 1] + 1;
  }
  by_atom_.resize(n_atoms);
  for (std::size_t s = 0; s < states_.size(); ++s) {
    for (int atom : states_[s]) by_atom_[atom].push_back(s);
  }
}

std::size_t ExcitationBasis::index_of(const AtomTuple& tuple) const {
  auto it = std::lower_bound(states_.begin(), states_.end(), tuple);
  if (it == states_.end() || *it != tuple) {
    throw std::invalid_argument("tuple is not a state of this basis");
  }
  return static_cast<std::size_t>(it - states_.begin());
}

bool ExcitationBasis::contains(std::size_t index, int atom) const {
  const auto& t = states_.at(index);
  return std::find(t.begin(), t.end(), atom) != t.end();
}

std::string ExcitationBasis::label(std::size_t index) const {
  std::string out = "|";
  const auto& t = states_.at(index);
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(t[i] + 1);
  }
  return out + ">";
}

ExcitationBasis enumerate_basis(int n_atoms, int q) { return ExcitationBasis(n_atoms, q); }

}  // namespace rydagg
