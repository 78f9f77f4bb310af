#pragma once

#include <vector>

#include <Eigen/Dense>

#include "qpr/pauli.hpp"

namespace qpr {

// H = -sum_i (Z_{i-1} X_i Z_{i+1} + h1 X_i + h2 X_i X_{i+1}), open chain,
// out-of-range letters dropped (identity).
WeightedPauliSum cluster_ising(int n, double h1, double h2);

struct GroundState {
  double energy = 0;
  Eigen::VectorXcd psi;
};
GroundState ground_state(const WeightedPauliSum& h);
GroundState ground_state(int n, double h1, double h2);

// string order parameter Z_1 X_2 X_4 ... X_{n-1} Z_n (even interior sites)
PauliString string_order(int n);
// S_{j,k} = Z_j X_{j+1} X_{j+3} ... X_{k-1} Z_k with out-of-range Z dropped
PauliString sop_factor(int n, int j, int k);

// |C> = prod CZ_{i,i+1} |+>^n
Eigen::VectorXcd cluster_state(int n);

// Phase boundaries along h2 at fixed h1: local maxima of -d2E0/dh2^2 on a
// uniform grid (central differences). Interior maxima only, strongest first
// capped at two, then sorted ascending.
struct BoundaryScan {
  std::vector<double> h2;
  std::vector<double> curvature;  // -E'' at h2[1..m-2], aligned with h2
  std::vector<double> boundaries;
};
BoundaryScan find_boundaries(int n, double h1, double h2_min, double h2_max, int points);

}  // namespace qpr
