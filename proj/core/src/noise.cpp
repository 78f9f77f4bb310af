#include "qpr/noise.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "qpr/qcnn.hpp"

namespace qpr::noise {

using std::complex;
using json = nlohmann::json;

// ---------------------------------------------------------------- DensityMatrix

DensityMatrix::DensityMatrix(int n) : n_(n) {
  if (n < 1 || n > 12) throw std::invalid_argument("density matrix size out of range");
  const auto dim = std::int64_t{1} << n;
  rho_ = Eigen::MatrixXcd::Zero(dim, dim);
  rho_(0, 0) = 1.0;
}

DensityMatrix DensityMatrix::from_pure(const Statevector& s) {
  DensityMatrix d(s.num_qubits());
  d.rho_ = s.amps() * s.amps().adjoint();
  return d;
}

namespace {

// indices with the given stride bits clear, i.e. 4^k block bases
std::vector<std::int64_t> clear_bases(std::int64_t dim, std::int64_t m1, std::int64_t m2 = 0) {
  std::vector<std::int64_t> out;
  out.reserve(std::size_t(dim >> (m2 ? 2 : 1)));
  for (std::int64_t i = 0; i < dim; ++i)
    if (!(i & m1) && !(i & m2)) out.push_back(i);
  return out;
}

}  // namespace

void DensityMatrix::apply_1q(int site, const Eigen::Matrix2cd& u) {
  apply_kraus_1q(site, {u});
}

void DensityMatrix::apply_kraus_1q(int site, const std::vector<Eigen::Matrix2cd>& ks) {
  const auto dim = std::int64_t{1} << n_;
  const auto m = std::int64_t{1} << (n_ - site);
  const auto bases = clear_bases(dim, m);
  for (std::int64_t r : bases)
    for (std::int64_t c : bases) {
      Eigen::Matrix2cd b;
      b << rho_(r, c), rho_(r, c | m), rho_(r | m, c), rho_(r | m, c | m);
      Eigen::Matrix2cd out = Eigen::Matrix2cd::Zero();
      for (const auto& k : ks) out += k * b * k.adjoint();
      rho_(r, c) = out(0, 0);
      rho_(r, c | m) = out(0, 1);
      rho_(r | m, c) = out(1, 0);
      rho_(r | m, c | m) = out(1, 1);
    }
}

void DensityMatrix::apply_kraus_2q(int a, int b, const std::vector<Eigen::Matrix4cd>& ks) {
  const auto dim = std::int64_t{1} << n_;
  const auto ma = std::int64_t{1} << (n_ - a);  // a < b: ma is the higher bit
  const auto mb = std::int64_t{1} << (n_ - b);
  const auto bases = clear_bases(dim, ma, mb);
  const std::int64_t off[4] = {0, mb, ma, ma | mb};  // block row index = 2*bit_a + bit_b
  for (std::int64_t r : bases)
    for (std::int64_t c : bases) {
      Eigen::Matrix4cd blk;
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) blk(i, j) = rho_(r | off[i], c | off[j]);
      Eigen::Matrix4cd out = Eigen::Matrix4cd::Zero();
      for (const auto& k : ks) out += k * blk * k.adjoint();
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) rho_(r | off[i], c | off[j]) = out(i, j);
    }
}

void DensityMatrix::apply_cz(int a, int b) {
  const auto dim = std::int64_t{1} << n_;
  const auto ma = std::int64_t{1} << (n_ - a);
  const auto mb = std::int64_t{1} << (n_ - b);
  auto sgn = [&](std::int64_t i) { return ((i & ma) && (i & mb)) ? -1.0 : 1.0; };
  for (std::int64_t r = 0; r < dim; ++r)
    for (std::int64_t c = 0; c < dim; ++c) rho_(r, c) *= sgn(r) * sgn(c);
}

void DensityMatrix::apply_diagonal_phase(const Eigen::VectorXcd& d) {
  const auto dim = rho_.rows();
  for (std::int64_t r = 0; r < dim; ++r)
    for (std::int64_t c = 0; c < dim; ++c) rho_(r, c) *= d[r] * std::conj(d[c]);
}

std::vector<double> DensityMatrix::diagonal() const {
  std::vector<double> p(std::size_t(rho_.rows()));
  for (std::int64_t i = 0; i < rho_.rows(); ++i) p[std::size_t(i)] = rho_(i, i).real();
  return p;
}

double DensityMatrix::expectation(const WeightedPauliSum& op) const {
  return (op.dense() * rho_).trace().real();
}

double DensityMatrix::state_fidelity(const Eigen::VectorXcd& psi) const {
  return (psi.adjoint() * rho_ * psi)(0, 0).real();
}

// ---------------------------------------------------------------- DeviceModel

void DeviceModel::validate() const {
  auto bad = [](const std::string& what, int i, double v) {
    std::ostringstream os;
    os << what << " invalid for qubit " << (i + 1) << ": " << v;
    return std::invalid_argument(os.str());
  };
  for (int i = 0; i < 7; ++i) {
    if (!(t1[i] > 0)) throw bad("t1", i, t1[i]);
    if (!(t2[i] > 0) || t2[i] > 2 * t1[i]) throw bad("t2 (must be in (0, 2*t1])", i, t2[i]);
    if (thermal_pop[i] < 0 || thermal_pop[i] > 0.1) throw bad("thermal population", i, thermal_pop[i]);
    if (readout_fidelity[i] <= 0.5 || readout_fidelity[i] > 1)
      throw bad("readout fidelity", i, readout_fidelity[i]);
  }
  for (int k = 0; k < 6; ++k) {
    if (cz_infidelity[k] < 0 || cz_infidelity[k] > 0.15)
      throw std::invalid_argument("cz infidelity out of range for pair " + std::to_string(k + 1));
    if (zz_hz[k] < 0) throw std::invalid_argument("negative zz strength");
  }
  if (!(t_1q > 0) || !(t_cz > 0) || !(t_readout > 0))
    throw std::invalid_argument("gate durations must be positive");
  for (int i = 0; i < 7; ++i) {
    Eigen::Matrix2d m = confusion(i + 1);
    if (m.minCoeff() < 0)
      throw bad("confusion (readout error inconsistent with T1 decay)", i, m.minCoeff());
  }
}

Eigen::Matrix2d DeviceModel::confusion(int q) const {
  double delta = 1 - std::exp(-t_readout / t1[q - 1]);
  double beta = std::max(1 - readout_fidelity[q - 1] - delta / 2, 5e-4);
  Eigen::Matrix2d m;
  m << 1 - beta, beta + delta, beta, 1 - beta - delta;
  return m;
}

Chi DeviceModel::chi(int pair_index) const {
  if (pair_index < 0 || pair_index > 5) throw std::invalid_argument("pair index out of range");
  if (chi_files[std::size_t(pair_index)]) {
    Chi c = load_chi(*chi_files[std::size_t(pair_index)]);
    validate_chi(c);
    return c;
  }
  return synth_chi(cz_infidelity[std::size_t(pair_index)]);
}

DeviceModel reference_device() {
  DeviceModel d;
  const double t1_us[7] = {38.1, 13.5, 19.8, 13.7, 19.8, 16.4, 15.6};
  const double t2_us[7] = {20.7, 12.9, 14.3, 10.1, 13.1, 19.1, 8.2};  // Ramsey values
  const double pth[7] = {3.1, 0.7, 2.7, 0.7, 1.3, 1.3, 1.6};
  const double ro[7] = {99.2, 98.7, 98.5, 97.7, 99.4, 99.2, 98.4};
  const double czerr[6] = {2.5, 1.3, 1.7, 1.6, 0.7, 3.8};
  for (int i = 0; i < 7; ++i) {
    d.t1[i] = t1_us[i] * 1e-6;
    d.t2[i] = t2_us[i] * 1e-6;
    d.thermal_pop[i] = pth[i] / 100;
    d.readout_fidelity[i] = ro[i] / 100;
  }
  for (int k = 0; k < 6; ++k) {
    d.cz_infidelity[k] = czerr[k] / 100;
    d.zz_hz[k] = 15e3;
  }
  return d;
}

DeviceModel load_device(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open device model: " + path);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument("device model parse error in " + path + ": " + e.what());
  }
  DeviceModel d;
  try {
    for (int i = 0; i < 7; ++i) {
      d.t1[i] = j.at("t1_seconds").at(i).get<double>();
      d.t2[i] = j.at("t2_seconds").at(i).get<double>();
      d.thermal_pop[i] = j.at("thermal_population").at(i).get<double>();
      d.readout_fidelity[i] = j.at("readout_fidelity").at(i).get<double>();
    }
    for (int k = 0; k < 6; ++k) {
      d.cz_infidelity[k] = j.at("cz_infidelity").at(k).get<double>();
      d.zz_hz[k] = j.at("zz_hz").at(k).get<double>();
    }
    d.t_1q = j.at("t_1q_seconds").get<double>();
    d.t_cz = j.at("t_cz_seconds").get<double>();
    d.t_readout = j.at("t_readout_seconds").get<double>();
    if (j.contains("chi_files") && !j["chi_files"].is_null())
      for (int k = 0; k < 6; ++k)
        if (!j["chi_files"].at(k).is_null())
          d.chi_files[k] = j["chi_files"].at(k).get<std::string>();
  } catch (const json::exception& e) {
    throw std::invalid_argument("device model field error in " + path + ": " + e.what());
  }
  d.validate();
  return d;
}

void save_device(const DeviceModel& dev, const std::string& path) {
  json j;
  j["schema_version"] = 1;
  j["t1_seconds"] = dev.t1;
  j["t2_seconds"] = dev.t2;
  j["thermal_population"] = dev.thermal_pop;
  j["readout_fidelity"] = dev.readout_fidelity;
  j["cz_infidelity"] = dev.cz_infidelity;
  j["zz_hz"] = dev.zz_hz;
  j["t_1q_seconds"] = dev.t_1q;
  j["t_cz_seconds"] = dev.t_cz;
  j["t_readout_seconds"] = dev.t_readout;
  bool any = false;
  for (const auto& c : dev.chi_files) any = any || c.has_value();
  if (any) {
    json files = json::array();
    for (const auto& c : dev.chi_files) files.push_back(c ? json(*c) : json(nullptr));
    j["chi_files"] = files;
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write device model: " + path);
  f << j.dump(2) << "\n";
}

// ---------------------------------------------------------------- channels

Gammas relaxation_rates(double t1, double t2, double dt) {
  Gammas g;
  g.g1 = dt / t1;
  g.g2 = dt * (1 / (2 * t2) - 1 / (4 * t1));
  auto reject = [](const char* which, double v) {
    std::ostringstream os;
    os << which << " out of range: " << v;
    throw std::invalid_argument(os.str());
  };
  if (g.g1 < 0 || g.g1 > 1) reject("gamma1", g.g1);
  if (g.g2 < 0 || g.g2 > 1) reject("gamma2", g.g2);
  if (g.g1 + g.g2 > 1) reject("gamma1+gamma2", g.g1 + g.g2);
  return g;
}

std::vector<Eigen::Matrix2cd> relax_dephase_kraus(double t1, double t2, double dt) {
  Gammas g = relaxation_rates(t1, t2, dt);
  Eigen::Matrix2cd k1 = Eigen::Matrix2cd::Zero(), k2 = Eigen::Matrix2cd::Zero(),
                   k3 = Eigen::Matrix2cd::Zero();
  k1(0, 1) = std::sqrt(g.g1);  // sigma^- = |0><1|
  k2(0, 0) = std::sqrt(g.g2);
  k2(1, 1) = -std::sqrt(g.g2);
  k3(0, 0) = std::sqrt(1 - g.g2);
  k3(1, 1) = std::sqrt(1 - g.g1 - g.g2);
  return {k1, k2, k3};
}

void relax_dephase_channel(DensityMatrix& rho, int q, double t1, double t2, double dt) {
  rho.apply_kraus_1q(q, relax_dephase_kraus(t1, t2, dt));
}

void zz_channel(DensityMatrix& rho, const std::vector<ZZCoupling>& couplings, double dt) {
  const int n = rho.num_qubits();
  const auto dim = std::int64_t{1} << n;
  Eigen::VectorXd phase = Eigen::VectorXd::Zero(dim);
  for (const auto& zz : couplings) {
    const auto ma = std::int64_t{1} << (n - zz.a);
    const auto mb = std::int64_t{1} << (n - zz.b);
    const double a = 2 * std::numbers::pi * zz.alpha_hz * dt;
    for (std::int64_t i = 0; i < dim; ++i)
      if ((i & ma) && (i & mb)) phase[i] += a;
  }
  Eigen::VectorXcd d(dim);
  for (std::int64_t i = 0; i < dim; ++i)
    d[i] = std::polar(1.0, -phase[i]);
  rho.apply_diagonal_phase(d);
}

// ---------------------------------------------------------------- chi

namespace {

const std::array<Eigen::Matrix4cd, 16>& pauli2_basis() {
  static const std::array<Eigen::Matrix4cd, 16> basis = [] {
    Eigen::Matrix2cd p[4];
    p[0] = Eigen::Matrix2cd::Identity();
    p[1] << 0, 1, 1, 0;
    p[2] << 0, complex<double>(0, -1), complex<double>(0, 1), 0;
    p[3] << 1, 0, 0, -1;
    std::array<Eigen::Matrix4cd, 16> out;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        Eigen::Matrix4cd m;
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) m.block<2, 2>(2 * i, 2 * j) = p[a](i, j) * p[b];
        out[std::size_t(4 * a + b)] = m;
      }
    return out;
  }();
  return basis;
}

}  // namespace

Chi chi_cz() {
  const auto& basis = pauli2_basis();
  Eigen::Matrix4cd cz = Eigen::Vector4cd(1, 1, 1, -1).asDiagonal();
  Eigen::Matrix<complex<double>, 16, 1> c;
  for (int a = 0; a < 16; ++a) c[a] = (basis[std::size_t(a)].adjoint() * cz).trace() / 4.0;
  return c * c.adjoint();
}

Chi chi_depolarizing() {
  return Chi::Identity() / 16.0;
}

Chi synth_chi(double target_infidelity) {
  if (target_infidelity < 0 || target_infidelity > 0.15)
    throw std::invalid_argument("chi target infidelity out of range: " +
                                std::to_string(target_infidelity));
  double lam = target_infidelity * 16 / 15;
  return (1 - lam) * chi_cz() + lam * chi_depolarizing();
}

double process_fidelity(const Chi& chi) {
  return (chi_cz() * chi).trace().real();
}

void validate_chi(const Chi& chi, double tol) {
  if ((chi - chi.adjoint()).cwiseAbs().maxCoeff() > tol)
    throw std::invalid_argument("chi matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Chi> es(chi);
  if (es.eigenvalues().minCoeff() < -tol)
    throw std::invalid_argument("chi matrix is not positive semidefinite");
  const auto& basis = pauli2_basis();
  Eigen::Matrix4cd s = Eigen::Matrix4cd::Zero();
  for (int a = 0; a < 16; ++a)
    for (int b = 0; b < 16; ++b)
      s += chi(a, b) * (basis[std::size_t(b)].adjoint() * basis[std::size_t(a)]);
  if ((s - Eigen::Matrix4cd::Identity()).cwiseAbs().maxCoeff() > tol)
    throw std::invalid_argument("chi matrix is not trace preserving");
}

std::vector<Eigen::Matrix4cd> chi_to_kraus(const Chi& chi) {
  const auto& basis = pauli2_basis();
  Eigen::SelfAdjointEigenSolver<Chi> es(chi);
  std::vector<Eigen::Matrix4cd> ks;
  for (int i = 0; i < 16; ++i) {
    if (es.eigenvalues()[i] <= 1e-14) continue;
    Eigen::Matrix4cd k = Eigen::Matrix4cd::Zero();
    for (int a = 0; a < 16; ++a) k += es.eigenvectors()(a, i) * basis[std::size_t(a)];
    ks.push_back(std::sqrt(es.eigenvalues()[i]) * k);
  }
  return ks;
}

void apply_chi_process(DensityMatrix& rho, int a, int b, const Chi& chi) {
  validate_chi(chi);
  rho.apply_kraus_2q(a, b, chi_to_kraus(chi));
}

Chi load_chi(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open chi file: " + path);
  Chi c;
  int row = 0;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (row >= 16) throw std::invalid_argument("chi file has more than 16 rows: " + path);
    std::istringstream ls(line);
    for (int col = 0; col < 16; ++col) {
      double re, im;
      if (!(ls >> re >> im))
        throw std::invalid_argument("chi file row " + std::to_string(row + 1) +
                                    " is short: " + path);
      c(row, col) = complex<double>(re, im);
    }
    ++row;
  }
  if (row != 16) throw std::invalid_argument("chi file has " + std::to_string(row) + " rows: " + path);
  return c;
}

void save_chi(const Chi& chi, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write chi file: " + path);
  f << "# two-qubit process matrix, row-major over the basis\n";
  f << "# II IX IY IZ XI XX XY XZ YI YX YY YZ ZI ZX ZY ZZ (re im pairs)\n";
  f.precision(17);
  for (int r = 0; r < 16; ++r) {
    for (int c = 0; c < 16; ++c) {
      if (c) f << ' ';
      f << chi(r, c).real() << ' ' << chi(r, c).imag();
    }
    f << '\n';
  }
}

// ---------------------------------------------------------------- engine

NoisyEngine::NoisyEngine(const DeviceModel& dev) : dev_(dev) {
  dev_.validate();
  for (int q = 1; q <= 7; ++q) {
    relax_1q_[q - 1] = relax_dephase_kraus(dev_.t1[q - 1], dev_.t2[q - 1], dev_.t_1q);
    relax_cz_[q - 1] = relax_dephase_kraus(dev_.t1[q - 1], dev_.t2[q - 1], dev_.t_cz);
  }
  for (int k = 0; k < 6; ++k) {
    Chi c = dev_.chi(k);
    validate_chi(c);
    cz_kraus_[std::size_t(k)] = chi_to_kraus(c);
    all_pairs_.push_back({k + 1, k + 2, dev_.zz_hz[std::size_t(k)]});
  }
}

void NoisyEngine::ry_layer(DensityMatrix& rho, const std::vector<std::pair<int, double>>& angles) const {
  for (const auto& [q, th] : angles) rho.apply_1q(q, ry_matrix(th));
  zz_channel(rho, all_pairs_, dev_.t_1q);
  for (int q = 1; q <= 7; ++q) rho.apply_kraus_1q(q, relax_1q_[std::size_t(q - 1)]);
}

void NoisyEngine::cz(DensityMatrix& rho, int a, int b) const {
  if (a > b) std::swap(a, b);
  if (b != a + 1 || a < 1 || b > 7)
    throw std::invalid_argument("no calibrated process for pair (" + std::to_string(a) + "," +
                                std::to_string(b) + ")");
  rho.apply_kraus_2q(a, b, cz_kraus_[std::size_t(a - 1)]);
  zz_channel(rho, all_pairs_, dev_.t_cz);
  for (int q = 1; q <= 7; ++q) rho.apply_kraus_1q(q, relax_cz_[std::size_t(q - 1)]);
}

void NoisyEngine::x_basis_rotation(DensityMatrix& rho, const std::vector<int>& sites) const {
  std::vector<std::pair<int, double>> angles;
  for (int q : sites) angles.emplace_back(q, x_basis_angle);
  ry_layer(rho, angles);
}

DensityMatrix NoisyEngine::prepare(const Circuit& c) const {
  if (c.n != 7) throw std::invalid_argument("noisy execution is defined for the 7-qubit chain");
  DensityMatrix rho(7);
  std::vector<std::pair<int, double>> layer;
  std::array<bool, 8> used{};
  auto flush = [&] {
    if (layer.empty()) return;
    ry_layer(rho, layer);
    layer.clear();
    used = {};
  };
  for (const Gate& g : c.gates) {
    switch (g.kind) {
      case Gate::RY:
        if (used[std::size_t(g.a)]) flush();
        layer.emplace_back(g.a, g.angle);
        used[std::size_t(g.a)] = true;
        break;
      case Gate::CZ:
        flush();
        cz(rho, g.a, g.b);
        break;
      case Gate::X:
      case Gate::Y:
      case Gate::Z: {
        flush();
        Eigen::Matrix2cd u;
        if (g.kind == Gate::X)
          u << 0, 1, 1, 0;
        else if (g.kind == Gate::Y)
          u << 0, complex<double>(0, -1), complex<double>(0, 1), 0;
        else
          u << 1, 0, 0, -1;
        rho.apply_1q(g.a, u);
        break;
      }
    }
  }
  flush();
  return rho;
}

DensityMatrix simulate_noisy_circuit(const Circuit& c, const DeviceModel& dev) {
  return NoisyEngine(dev).prepare(c);
}

// ---------------------------------------------------------------- readout

Eigen::MatrixXd build_assignment_matrix(const DeviceModel& dev, const std::vector<int>& qubits) {
  if (qubits.size() > 10) throw std::invalid_argument("assignment matrix limited to 10 qubits");
  // first listed qubit is the most significant outcome bit
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(1, 1);
  for (auto it = qubits.rbegin(); it != qubits.rend(); ++it) {
    int q = *it;
    Eigen::Matrix2d c = dev.confusion(q);
    Eigen::MatrixXd next(m.rows() * 2, m.cols() * 2);
    next.topLeftCorner(m.rows(), m.cols()) = c(0, 0) * m;
    next.topRightCorner(m.rows(), m.cols()) = c(0, 1) * m;
    next.bottomLeftCorner(m.rows(), m.cols()) = c(1, 0) * m;
    next.bottomRightCorner(m.rows(), m.cols()) = c(1, 1) * m;
    m = std::move(next);
  }
  return m;
}

Mitigated mitigate_readout(const std::vector<double>& p, const Eigen::MatrixXd& m) {
  if (std::int64_t(p.size()) != m.rows())
    throw std::invalid_argument("probability vector does not match assignment matrix");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  double smin = svd.singularValues().minCoeff();
  if (smin < 1e-12) throw std::invalid_argument("assignment matrix is singular");
  Mitigated out;
  out.condition_number = svd.singularValues().maxCoeff() / smin;
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(p.data(), std::int64_t(p.size()));
  Eigen::VectorXd corrected = svd.solve(v);
  out.p.assign(corrected.data(), corrected.data() + corrected.size());
  return out;
}

namespace {

// per-qubit column-stochastic action on an n-qubit distribution
std::vector<double> apply_2x2_all(const DeviceModel& dev, std::vector<double> p, bool invert) {
  const int n = int(std::countr_zero(p.size()));
  if (p.size() != (std::size_t{1} << n)) throw std::invalid_argument("distribution size not 2^n");
  for (int q = 1; q <= n; ++q) {
    Eigen::Matrix2d m = dev.confusion(q);
    if (invert) {
      double det = m.determinant();
      if (std::abs(det) < 1e-12) throw std::invalid_argument("assignment matrix is singular");
      Eigen::Matrix2d inv;
      inv << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
      m = inv / det;
    }
    const auto stride = std::size_t{1} << (n - q);
    for (std::size_t base = 0; base < p.size(); base += 2 * stride)
      for (std::size_t i = base; i < base + stride; ++i) {
        double p0 = p[i], p1 = p[i + stride];
        p[i] = m(0, 0) * p0 + m(0, 1) * p1;
        p[i + stride] = m(1, 0) * p0 + m(1, 1) * p1;
      }
  }
  return p;
}

}  // namespace

std::vector<double> apply_confusion_all(const DeviceModel& dev, std::vector<double> p) {
  return apply_2x2_all(dev, std::move(p), false);
}

std::vector<double> mitigate_all(const DeviceModel& dev, std::vector<double> p) {
  return apply_2x2_all(dev, std::move(p), true);
}

Preselection preselect(const DeviceModel& dev) {
  Preselection out;
  for (int q = 1; q <= 7; ++q) {
    Eigen::Matrix2d m = dev.confusion(q);
    double pth = dev.thermal_pop[q - 1];
    out.acceptance *= (1 - pth) * m(0, 0) + pth * m(0, 1);
    out.thermal_factor *= 1 - pth;
  }
  return out;
}

// ---------------------------------------------------------------- estimates

namespace {

std::vector<double> sampled_frequencies(const std::vector<double>& p, std::uint64_t shots,
                                        std::uint64_t seed) {
  std::vector<double> freq(p.size(), 0.0);
  std::mt19937_64 rng(seed);
  for (std::uint64_t s = 0; s < shots; ++s) {
    double r = double(rng() >> 11) * 0x1.0p-53, acc = 0;
    std::size_t pick = p.size() - 1;
    for (std::size_t i = 0; i < p.size(); ++i) {
      acc += p[i];
      if (r < acc) {
        pick = i;
        break;
      }
    }
    freq[pick] += 1.0;
  }
  for (double& f : freq) f /= double(shots);
  return freq;
}

template <typename SignFn>
NoisyEstimate estimate(const NoisyEngine& eng, const DensityMatrix& rho, std::uint64_t shots,
                       std::uint64_t seed, bool mitigate, SignFn&& sign) {
  NoisyEstimate out;
  out.shots = shots;
  out.seed = seed;
  out.mitigated = mitigate;
  std::vector<double> p = rho.diagonal();
  if (shots == 0) {
    if (!mitigate) p = apply_confusion_all(eng.device(), std::move(p));
    // mitigated exact readout: confusion followed by its inverse cancels
  } else {
    p = apply_confusion_all(eng.device(), std::move(p));
    p = sampled_frequencies(p, shots, seed);
    if (mitigate) p = mitigate_all(eng.device(), std::move(p));
  }
  double v = 0;
  for (std::size_t b = 0; b < p.size(); ++b) v += sign(std::uint64_t(b)) * p[b];
  out.value = v;
  return out;
}

}  // namespace

NoisyEstimate measure_string_order(const NoisyEngine& eng, const Circuit& prep,
                                   std::uint64_t shots, std::uint64_t seed, bool mitigate) {
  DensityMatrix rho = eng.prepare(prep);
  eng.x_basis_rotation(rho, {2, 4, 6});
  // Z1 X2 X4 X6 Z7 reads as plain parity after the rotation
  return estimate(eng, rho, shots, seed, mitigate, [](std::uint64_t b) {
    int bits = std::popcount(b & 0b1101011u);  // sites 1,2,4,6,7 of 7
    return (bits % 2) ? -1.0 : 1.0;
  });
}

NoisyEstimate measure_qcnn(const NoisyEngine& eng, const Circuit& prep, std::uint64_t shots,
                           std::uint64_t seed, bool mitigate) {
  DensityMatrix rho = eng.prepare(prep);
  for (int a = 1; a <= 6; ++a) eng.cz(rho, a, a + 1);
  eng.x_basis_rotation(rho, {1, 2, 3, 4, 5, 6, 7});
  return estimate(eng, rho, shots, seed, mitigate, [](std::uint64_t b) {
    return double(2 * qcnn::classify_bits7(b) - 1);
  });
}

}  // namespace qpr::noise
