#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qpr/pauli.hpp"
#include "qpr/simulator.hpp"

namespace qpr::noise {

using Chi = Eigen::Matrix<std::complex<double>, 16, 16>;

// Mixed state, same amplitude-bit convention as Statevector (site 1 = MSB).
class DensityMatrix {
 public:
  explicit DensityMatrix(int n);  // |0..0><0..0|
  static DensityMatrix from_pure(const Statevector& s);

  int num_qubits() const { return n_; }
  Eigen::MatrixXcd& mat() { return rho_; }
  const Eigen::MatrixXcd& mat() const { return rho_; }

  void apply_1q(int site, const Eigen::Matrix2cd& u);
  void apply_kraus_1q(int site, const std::vector<Eigen::Matrix2cd>& ks);
  void apply_kraus_2q(int a, int b, const std::vector<Eigen::Matrix4cd>& ks);
  void apply_cz(int a, int b);
  void apply_diagonal_phase(const Eigen::VectorXcd& d);  // rho -> D rho D^dag

  std::vector<double> diagonal() const;  // Z-basis probabilities
  double trace_real() const { return rho_.trace().real(); }
  double expectation(const WeightedPauliSum& op) const;
  double state_fidelity(const Eigen::VectorXcd& psi) const;  // <psi|rho|psi>

 private:
  int n_;
  Eigen::MatrixXcd rho_;
};

// Seven-qubit chain characterization. Stored values are the calibration-table
// numbers; confusion matrices and chi processes are derived on demand, so a
// file round trip is exact.
struct DeviceModel {
  std::array<double, 7> t1{};                // seconds
  std::array<double, 7> t2{};                // seconds, t2 <= 2*t1
  std::array<double, 7> thermal_pop{};
  std::array<double, 7> readout_fidelity{};  // individual assignment prob.
  std::array<double, 6> cz_infidelity{};     // adjacent pairs (1,2)..(6,7)
  std::array<double, 6> zz_hz{};             // alpha_zz / 2pi per pair
  double t_1q = 50e-9;
  double t_cz = 71e-9;
  double t_readout = 600e-9;
  // optional externally measured chi per pair, overrides the synthetic one
  std::array<std::optional<std::string>, 6> chi_files{};

  void validate() const;  // throws std::invalid_argument
  // column i is the outcome distribution for prepared state i; the excited
  // column is penalized by T1 decay over the readout window
  Eigen::Matrix2d confusion(int q) const;
  Chi chi(int pair_index) const;  // 0-based, pair (k+1, k+2)
};

DeviceModel reference_device();  // the shipped seven-qubit calibration set
DeviceModel load_device(const std::string& path);
void save_device(const DeviceModel& dev, const std::string& path);

// gamma1 = dt/t1, gamma2 = dt*(1/(2 t2) - 1/(4 t1))
struct Gammas {
  double g1 = 0, g2 = 0;
};
Gammas relaxation_rates(double t1, double t2, double dt);
std::vector<Eigen::Matrix2cd> relax_dephase_kraus(double t1, double t2, double dt);
void relax_dephase_channel(DensityMatrix& rho, int q, double t1, double t2, double dt);

struct ZZCoupling {
  int a = 0, b = 0;
  double alpha_hz = 0;
};
// exp(-i dt H) with H = sum over couplings of 2pi*alpha_hz/4 (1-Z)(1-Z)
void zz_channel(DensityMatrix& rho, const std::vector<ZZCoupling>& couplings, double dt);

Chi chi_cz();
Chi chi_depolarizing();
Chi synth_chi(double target_infidelity);        // mixes chi_cz toward depolarizing
double process_fidelity(const Chi& chi);        // Tr(chi_cz * chi)
void validate_chi(const Chi& chi, double tol = 1e-8);
std::vector<Eigen::Matrix4cd> chi_to_kraus(const Chi& chi);
void apply_chi_process(DensityMatrix& rho, int a, int b, const Chi& chi);
Chi load_chi(const std::string& path);
void save_chi(const Chi& chi, const std::string& path);

// Slot-scheduled noisy executor. Single-qubit rotation layers are
// time-aligned 50 ns slots: rotations, then ZZ on every adjacent pair, then
// relaxation on every qubit. Each CZ runs sequentially: its chi process,
// then ZZ and relaxation on the whole chain for the CZ duration. X/Y/Z
// gates are treated as instantaneous frame flips.
class NoisyEngine {
 public:
  explicit NoisyEngine(const DeviceModel& dev);

  const DeviceModel& device() const { return dev_; }
  void ry_layer(DensityMatrix& rho, const std::vector<std::pair<int, double>>& angles) const;
  void cz(DensityMatrix& rho, int a, int b) const;  // adjacent pairs only
  void x_basis_rotation(DensityMatrix& rho, const std::vector<int>& sites) const;
  DensityMatrix prepare(const Circuit& c) const;  // layers inferred from gate order

 private:
  DeviceModel dev_;
  std::array<std::vector<Eigen::Matrix2cd>, 7> relax_1q_, relax_cz_;
  std::array<std::vector<Eigen::Matrix4cd>, 6> cz_kraus_;
  std::vector<ZZCoupling> all_pairs_;
};

DensityMatrix simulate_noisy_circuit(const Circuit& c, const DeviceModel& dev);

// Readout. build_assignment_matrix tensors per-qubit confusions (k <= 10);
// the *_all variants act axis-wise over a full n-qubit distribution.
Eigen::MatrixXd build_assignment_matrix(const DeviceModel& dev, const std::vector<int>& qubits);
struct Mitigated {
  std::vector<double> p;  // quasi-probabilities, no clipping
  double condition_number = 0;
};
Mitigated mitigate_readout(const std::vector<double>& p, const Eigen::MatrixXd& m);
std::vector<double> apply_confusion_all(const DeviceModel& dev, std::vector<double> p);
std::vector<double> mitigate_all(const DeviceModel& dev, std::vector<double> p);

struct Preselection {
  double acceptance = 1;      // P(all qubits read 0 at the start)
  double thermal_factor = 1;  // product of (1 - thermal_pop)
};
Preselection preselect(const DeviceModel& dev);

// End-to-end noisy estimates of the two phase diagnostics for a prepared
// state. shots = 0 evaluates exactly; in exact mode readout confusion and
// its inverse cancel, so the mitigated value is the plain expectation on the
// decohered state. With mitigate = false the confusion is left in.
struct NoisyEstimate {
  double value = 0;
  std::uint64_t shots = 0;
  std::uint64_t seed = 0;
  bool mitigated = true;
};
NoisyEstimate measure_string_order(const NoisyEngine& eng, const Circuit& prep,
                                   std::uint64_t shots = 0, std::uint64_t seed = 0,
                                   bool mitigate = true);
NoisyEstimate measure_qcnn(const NoisyEngine& eng, const Circuit& prep,
                           std::uint64_t shots = 0, std::uint64_t seed = 0,
                           bool mitigate = true);

}  // namespace qpr::noise
