#pragma once

#include <array>
#include <cstdint>

#include "qpr/msop.hpp"
#include "qpr/simulator.hpp"

namespace qpr::qcnn {

// The phase-recognition circuit in its three realizations: the coherent
// deferred-measurement form (full), the form with measurement byproducts
// commuted through to the end (intermediate), and the shallow form of two
// CZ layers plus X-basis readout and classical post-processing (equivalent).
enum class Form { full, intermediate, equivalent };

// Dense building blocks, 7 qubits, site 1 in the most significant bit.
// Controlled ops activate on |-> for X-basis controls and |1> for Z-basis
// controls: U = 1 - P + P*M with P the control projector.
Eigen::MatrixXcd op_on(int n, const std::vector<std::pair<int, Eigen::Matrix2cd>>& site_ops);
Eigen::MatrixXcd controlled_op(int n, const std::vector<int>& x_controls,
                               const std::vector<int>& z_controls,
                               const std::vector<std::pair<int, Eigen::Matrix2cd>>& targets);
Eigen::MatrixXcd cz_dense(int n, int a, int b);

Eigen::MatrixXcd conv_unitary();          // nn CZs, CZ14, CZ47, X-controlled NOTs
Eigen::MatrixXcd pool_unitary();          // X-controlled Z from 2,3,5,6 onto 1,4,7
Eigen::MatrixXcd fc_unitary();            // CZ14, CZ47, CxZ4;1, CxZ4;7, CxCxZ17;4
Eigen::MatrixXcd full_unitary();          // fc * pool * conv
Eigen::MatrixXcd intermediate_unitary();  // byproducts glued to their parents; same matrix
Eigen::MatrixXcd msop_dense();            // (pool*conv)^dag fc^dag X4 fc (pool*conv)

// Two CZ layers (1,2),(3,4),(5,6) then (2,3),(4,5),(6,7); X-basis readout on
// all 7 qubits is applied by qcnn_output, not stored as gates.
Circuit build_equivalent_circuit(int n = 7);

// x = (x1,x3,x4,x5,x7), X-basis outcome bits with +1 -> 0. diagonal_form is
// the +-1-valued diagonal of the pushed-through observable; y = (1+D)/2.
int diagonal_form(const std::array<int, 5>& x);
int classify_bits(const std::array<int, 5>& x);
int classify_bits7(std::uint64_t bits);  // full 7-bit string, site 1 = MSB

struct QcnnOutcome {
  double y_expect = 0;  // 2<y>-1
  std::uint64_t shots = 0;
  std::uint64_t seed = 0;
  BitstringDistribution dist;
};

// Runs the equivalent circuit and classifies. shots = 0 sums exactly; then
// y_expect equals the expectation of the expanded observable on the input.
QcnnOutcome qcnn_output(const Statevector& s, std::uint64_t shots = 0, std::uint64_t seed = 0);
QcnnOutcome qcnn_output(const Eigen::MatrixXcd& rho, std::uint64_t shots = 0, std::uint64_t seed = 0);

// P(y = 1) for a density matrix under the chosen realization, dense.
double output_probability(const Eigen::MatrixXcd& rho, Form form);

struct EquivalenceReport {
  int trials = 0;
  double max_deviation = 0;
};
EquivalenceReport equivalence_check(Form a, Form b, int trials, std::uint64_t seed);

// Expansion of the pushed-through observable (see msop.hpp for semantics).
msop::Expansion msop_expand(int d, std::uint64_t memory_cap_bytes = std::uint64_t{2} << 30,
                            bool allow_truncation = false, msop::Part part = msop::Part::full);

}  // namespace qpr::qcnn
