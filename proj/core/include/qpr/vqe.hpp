#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qpr/pauli.hpp"
#include "qpr/simulator.hpp"

namespace qpr::vqe {

// Hardware-native ansatz on the 7-qubit chain. One block is
//   CZ (1,2)(3,4)(5,6); Ry on 1..6; CZ (2,3)(4,5)(6,7); Ry on 2..7
// preceded by an initial Ry layer on all seven qubits.
int num_angles(int m);  // 7 + 12*m
Circuit build_ansatz_circuit(const std::vector<double>& theta, int m = 1);

double ansatz_energy(const std::vector<double>& theta, const WeightedPauliSum& h, int m = 1);
// parameter-shift rule, exact for Ry generators
std::vector<double> ansatz_gradient(const std::vector<double>& theta, const WeightedPauliSum& h,
                                    int m = 1);

struct OptimizeOptions {
  int m = 1;
  int restarts = 25;
  int max_iterations = 2000;
  double gradient_tolerance = 1e-6;
  double accept_fidelity = 0.9;
  std::uint64_t seed = 1234;  // restart k draws its angles from seed + k
  int jobs = 1;
};

struct OptimizationResult {
  std::vector<double> theta;
  double energy = 0;
  double fidelity = 0;  // against the exact ground state
  int iterations = 0;
  int restart_index = -1;
  std::uint64_t seed = 0;
  bool accepted = false;
  std::vector<double> trace;  // energy after each iteration of the kept restart
};

// Restarts run in waves of opts.jobs; the kept result is the accepted restart
// with the lowest index, so the outcome does not depend on thread timing. An
// exhausted budget returns the lowest-energy restart with accepted = false.
OptimizationResult optimize(double h1, double h2, const OptimizeOptions& opts = {});

// Pulls every first-layer angle into [-pi/2, pi/2] by pushing the absorbed
// pi rotations through the entangling layers. The circuit is unchanged up to
// a global phase and a prefix of Z gates, which act trivially on |0...0>.
struct RewrittenAngles {
  std::vector<double> theta;
  unsigned zmask = 0;  // bit (q-1) set: Z on qubit q before the circuit
};
RewrittenAngles rewrite_angles(const std::vector<double>& theta);  // m = 1

double wrap_angle(double a);  // into (-pi, pi]

// One JSON object per line: {"h1":..,"h2":..,"angles":[..],"fidelity":..,
// "energy":..,"seed":..}. Later lines shadow earlier ones on lookup.
struct AngleRecord {
  double h1 = 0, h2 = 0;
  std::vector<double> angles;
  double fidelity = 0, energy = 0;
  std::uint64_t seed = 0;
};
std::vector<AngleRecord> load_angle_store(const std::string& path);
void append_angle_record(const std::string& path, const AngleRecord& rec);
std::optional<AngleRecord> lookup_angles(const std::vector<AngleRecord>& store, double h1,
                                         double h2, double tol = 1e-9);

}  // namespace qpr::vqe
