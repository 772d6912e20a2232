#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace rydagg {

/// Sorted atom indices carrying the p-excitations. Stored 0-based; every
/// printed form is 1-based.
using AtomTuple = std::vector<int>;

/// Ordered enumeration of the q-excitation product states over N atoms.
/// States are sorted tuples in lexicographic order, so for N=5, q=2 the list
/// runs |1,2>, |1,3>, ..., |4,5>.
class ExcitationBasis {
 public:
  ExcitationBasis(int n_atoms, int q);

  int n_atoms() const noexcept { return n_atoms_; }
  int excitations() const noexcept { return q_; }
  std::size_t size() const noexcept { return states_.size(); }

  const AtomTuple& tuple_of(std::size_t index) const { return states_.at(index); }
  /// Throws std::invalid_argument if the tuple is not a basis state.
  std::size_t index_of(const AtomTuple& tuple) const;
  bool contains(std::size_t index, int atom) const;

  /// Basis states that have an excitation on `atom`.
  const std::vector<std::size_t>& states_with(int atom) const { return by_atom_.at(atom); }
  const std::vector<AtomTuple>& states() const noexcept { return states_; }

  /// "|1,2>" style label.
  std::string label(std::size_t index) const;

 private:
  int n_atoms_;
  int q_;
  std::vector<AtomTuple> states_;
  std::vector<std::vector<std::size_t>> by_atom_;
};

ExcitationBasis enumerate_basis(int n_atoms, int q);

std::size_t binomial(int n, int k);

}  // namespace rydagg
