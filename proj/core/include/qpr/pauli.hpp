#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace qpr {

// Pauli string on n <= 64 sites. Sites are 1-based; site j lives in bit j-1
// of the x/z masks. A site with both bits set is Y, so the operator is the
// plain tensor product of I/X/Y/Z letters with no extra phase (Hermitian).
struct PauliString {
  int n = 0;
  uint64_t x = 0;
  uint64_t z = 0;

  char letter(int site) const;
  int weight() const;
  bool is_identity() const { return (x | z) == 0; }

  // "X1Z2", "Z3X4Z5", identity -> "I". A leading '-' is accepted by parse()
  // and produced by WeightedPauliSum printing, not by str().
  std::string str() const;
  static PauliString parse(int n, const std::string& s);

  static PauliString from_letters(int n, const std::vector<std::pair<int, char>>& letters);

  bool operator==(const PauliString&) const = default;
};

// a*b = i^phase_pow * p with phase_pow in {0,1,2,3}
struct PauliProduct {
  PauliString p;
  int phase_pow = 0;
};
PauliProduct mul(const PauliString& a, const PauliString& b);
bool commutes(const PauliString& a, const PauliString& b);

// CZ_{ab} p CZ_{ab}. X or Y on one site of the pair picks up a Z on the
// other; the result stays Hermitian, so phase_pow is 0 or 2 (X
// on one site with Y on the other flips sign).
PauliProduct conjugate_by_cz(const PauliString& p, int a, int b);

// Dense matrix / statevector conventions: site 1 is the most significant
// amplitude bit, so |psi> index bit (n-j) holds site j and "0000000" reads
// left to right as sites 1..7.
Eigen::MatrixXcd dense(const PauliString& p);
std::complex<double> expectation(const PauliString& p, const Eigen::VectorXcd& psi);

struct WeightedPauliSum {
  int n = 0;
  std::vector<std::pair<double, PauliString>> terms;

  void add(double coef, const PauliString& p) { terms.emplace_back(coef, p); }
  Eigen::MatrixXcd dense() const;
  double expectation(const Eigen::VectorXcd& psi) const;
};

// Qubit-wise commuting grouping. Each setting holds one measurement basis
// letter per site ('I' where unconstrained) and the indices of the grouped
// strings. Greedy first-fit in input order.
struct MeasurementSetting {
  std::string basis;
  std::vector<int> members;
};
std::vector<MeasurementSetting> group_qubitwise(int n, const std::vector<PauliString>& strings);

}  // namespace qpr
