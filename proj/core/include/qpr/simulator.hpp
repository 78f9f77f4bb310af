#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qpr/pauli.hpp"

namespace qpr {

// Dense statevector, site 1 in the most significant amplitude bit.
class Statevector {
 public:
  explicit Statevector(int n);
  static Statevector zero(int n) { return Statevector(n); }

  int num_qubits() const { return n_; }
  Eigen::VectorXcd& amps() { return amp_; }
  const Eigen::VectorXcd& amps() const { return amp_; }

  void ry(int site, double theta);
  void cz(int a, int b);
  void x(int site);
  void y(int site);
  void z(int site);
  void apply_1q(int site, const Eigen::Matrix2cd& u);

  std::vector<double> probabilities() const;
  uint64_t sample(std::mt19937_64& rng) const;
  double expectation(const WeightedPauliSum& op) const { return op.expectation(amp_); }

 private:
  int n_;
  Eigen::VectorXcd amp_;
};

// Ry(theta) = [[cos t/2, -sin t/2], [sin t/2, cos t/2]]
Eigen::Matrix2cd ry_matrix(double theta);

struct Gate {
  enum Kind { RY, CZ, X, Y, Z } kind;
  int a = 0;
  int b = 0;        // CZ only
  double angle = 0; // RY only
};

// Text format: one gate per line, 1-based sites, '#' starts a comment.
//   RY 3 1.5707963267948966
//   CZ 1 2
//   X 5
struct Circuit {
  int n = 0;
  std::vector<Gate> gates;

  void ry(int site, double theta) { gates.push_back({Gate::RY, site, 0, theta}); }
  void cz(int a, int b) { gates.push_back({Gate::CZ, a, b, 0}); }
  void x(int site) { gates.push_back({Gate::X, site, 0, 0}); }
  void y(int site) { gates.push_back({Gate::Y, site, 0, 0}); }
  void z(int site) { gates.push_back({Gate::Z, site, 0, 0}); }

  void apply_to(Statevector& sv) const;
  Statevector run() const;

  std::string text() const;
  static Circuit parse(int n, std::istream& in);
  static Circuit parse(int n, const std::string& text);
};

// appending this before a Z-basis readout measures X: Ry(-pi/2)^dag Z Ry(-pi/2) = X
inline constexpr double x_basis_angle = -1.5707963267948966;

// Outcome bits use the X-eigenvalue +1 -> bit 0 convention on the rotated
// sites and plain Z readout elsewhere. Exact mode (shots = 0) fills p with
// the full 2^n distribution; sampled mode fills counts (sum = shots) and p
// with the empirical frequencies.
struct BitstringDistribution {
  int n = 0;
  std::vector<int> x_sites;
  std::uint64_t shots = 0;
  std::uint64_t seed = 0;
  std::vector<double> p;
  std::vector<std::uint64_t> counts;

  double total() const;
};

BitstringDistribution sample_x_basis(const Statevector& s, const std::vector<int>& sites,
                                     std::uint64_t shots, std::uint64_t seed);

// |<a|b>|^2
double fidelity(const Statevector& a, const Statevector& b);
double fidelity(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b);

}  // namespace qpr
