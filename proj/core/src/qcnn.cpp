#include "qpr/qcnn.hpp"

#include <stdexcept>

namespace qpr::qcnn {

namespace {

constexpr int kN = 7;
constexpr int kDim = 1 << kN;

Eigen::Matrix2cd pauli_x() {
  Eigen::Matrix2cd m;
  m << 0, 1, 1, 0;
  return m;
}

Eigen::Matrix2cd pauli_z() {
  Eigen::Matrix2cd m;
  m << 1, 0, 0, -1;
  return m;
}

Eigen::Matrix2cd proj_minus() {  // |-><-|
  Eigen::Matrix2cd m;
  m << 0.5, -0.5, -0.5, 0.5;
  return m;
}

Eigen::Matrix2cd proj_one() {
  Eigen::Matrix2cd m;
  m << 0, 0, 0, 1;
  return m;
}

}  // namespace

Eigen::MatrixXcd op_on(int n, const std::vector<std::pair<int, Eigen::Matrix2cd>>& site_ops) {
  Eigen::MatrixXcd full = Eigen::MatrixXcd::Identity(1, 1);
  // fold from site n down so site 1 lands in the most significant bit,
  // matching the statevector layout
  for (int j = n; j >= 1; --j) {
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Identity();
    for (const auto& [site, op] : site_ops)
      if (site == j) m = op * m;
    Eigen::MatrixXcd next(full.rows() * 2, full.cols() * 2);
    next.topLeftCorner(full.rows(), full.cols()) = m(0, 0) * full;
    next.topRightCorner(full.rows(), full.cols()) = m(0, 1) * full;
    next.bottomLeftCorner(full.rows(), full.cols()) = m(1, 0) * full;
    next.bottomRightCorner(full.rows(), full.cols()) = m(1, 1) * full;
    full = std::move(next);
  }
  return full;
}

Eigen::MatrixXcd controlled_op(int n, const std::vector<int>& x_controls,
                               const std::vector<int>& z_controls,
                               const std::vector<std::pair<int, Eigen::Matrix2cd>>& targets) {
  const auto dim = std::int64_t{1} << n;
  Eigen::MatrixXcd proj = Eigen::MatrixXcd::Identity(dim, dim);
  for (int q : x_controls) proj = proj * op_on(n, {{q, proj_minus()}});
  for (int q : z_controls) proj = proj * op_on(n, {{q, proj_one()}});
  return Eigen::MatrixXcd::Identity(dim, dim) - proj + proj * op_on(n, targets);
}

Eigen::MatrixXcd cz_dense(int n, int a, int b) {
  return controlled_op(n, {}, {a}, {{b, pauli_z()}});
}

Eigen::MatrixXcd conv_unitary() {
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(kDim, kDim);
  for (auto [a, b] : {std::pair{1, 2}, {3, 4}, {5, 6}, {2, 3}, {4, 5}, {6, 7}})
    u = cz_dense(kN, a, b) * u;
  u = cz_dense(kN, 1, 4) * u;
  u = cz_dense(kN, 4, 7) * u;
  u = controlled_op(kN, {2}, {}, {{1, pauli_x()}}) * u;
  u = controlled_op(kN, {3, 5}, {}, {{4, pauli_x()}}) * u;
  u = controlled_op(kN, {6}, {}, {{7, pauli_x()}}) * u;
  return u;
}

Eigen::MatrixXcd pool_unitary() {
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(kDim, kDim);
  u = controlled_op(kN, {3}, {}, {{1, pauli_z()}}) * u;
  u = controlled_op(kN, {2}, {}, {{4, pauli_z()}}) * u;
  u = controlled_op(kN, {6}, {}, {{4, pauli_z()}}) * u;
  u = controlled_op(kN, {5}, {}, {{7, pauli_z()}}) * u;
  return u;
}

Eigen::MatrixXcd fc_unitary() {
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(kDim, kDim);
  u = cz_dense(kN, 1, 4) * u;
  u = cz_dense(kN, 4, 7) * u;
  u = controlled_op(kN, {4}, {}, {{1, pauli_z()}}) * u;
  u = controlled_op(kN, {4}, {}, {{7, pauli_z()}}) * u;
  u = controlled_op(kN, {1, 7}, {}, {{4, pauli_z()}}) * u;
  return u;
}

Eigen::MatrixXcd full_unitary() {
  return fc_unitary() * pool_unitary() * conv_unitary();
}

Eigen::MatrixXcd intermediate_unitary() {
  // Exchange byproducts stay glued to their parent gates; the three groups
  // commute with each other but the byproducts do not commute across parents.
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(kDim, kDim);
  for (auto [a, b] : {std::pair{1, 2}, {3, 4}, {5, 6}, {2, 3}, {4, 5}, {6, 7}})
    u = cz_dense(kN, a, b) * u;
  Eigen::MatrixXcd q21 =
      controlled_op(kN, {2}, {}, {{1, pauli_x()}}) * controlled_op(kN, {2}, {}, {{4, pauli_z()}});
  Eigen::MatrixXcd q354 = controlled_op(kN, {3, 5}, {}, {{4, pauli_x()}}) *
                          controlled_op(kN, {3, 5}, {}, {{1, pauli_z()}}) *
                          controlled_op(kN, {3, 5}, {}, {{7, pauli_z()}});
  Eigen::MatrixXcd q67 =
      controlled_op(kN, {6}, {}, {{7, pauli_x()}}) * controlled_op(kN, {6}, {}, {{4, pauli_z()}});
  u = q67 * u;
  u = q354 * u;
  u = q21 * u;
  u = pool_unitary() * u;
  u = controlled_op(kN, {4}, {}, {{7, pauli_z()}}) * u;
  u = controlled_op(kN, {4}, {}, {{1, pauli_z()}}) * u;
  u = controlled_op(kN, {1, 7}, {}, {{4, pauli_z()}}) * u;
  return u;
}

Eigen::MatrixXcd msop_dense() {
  Eigen::MatrixXcd ucp = pool_unitary() * conv_unitary();
  Eigen::MatrixXcd ufc = fc_unitary();
  Eigen::MatrixXcd x4 = op_on(kN, {{4, pauli_x()}});
  return ucp.adjoint() * ufc.adjoint() * x4 * ufc * ucp;
}

Circuit build_equivalent_circuit(int n) {
  if (n != kN) throw std::invalid_argument("equivalent circuit is defined for 7 qubits");
  Circuit c;
  c.n = n;
  for (auto [a, b] : {std::pair{1, 2}, {3, 4}, {5, 6}}) c.cz(a, b);
  for (auto [a, b] : {std::pair{2, 3}, {4, 5}, {6, 7}}) c.cz(a, b);
  return c;
}

int diagonal_form(const std::array<int, 5>& x) {
  // positions: x[0]=x1, x[1]=x3, x[2]=x4, x[3]=x5, x[4]=x7
  auto s = [&](std::initializer_list<int> idx) {
    int t = 0;
    for (int i : idx) t += x[i];
    return (t % 2) ? -1 : 1;
  };
  int quarter = s({0}) + s({0, 1}) + s({0, 1, 3}) + s({1, 3, 4}) + s({3, 4}) + s({4}) -
                s({0, 3}) - s({1, 4});
  int half = s({2}) - s({0, 1, 2, 3, 4});
  int d4 = quarter + 2 * half;  // 4*D
  if (d4 != 4 && d4 != -4) throw std::logic_error("diagonal form is not +-1");
  return d4 / 4;
}

int classify_bits(const std::array<int, 5>& x) {
  return (1 + diagonal_form(x)) / 2;
}

int classify_bits7(std::uint64_t bits) {
  auto bit = [&](int site) { return int((bits >> (kN - site)) & 1); };
  return classify_bits({bit(1), bit(3), bit(4), bit(5), bit(7)});
}

QcnnOutcome qcnn_output(const Statevector& s, std::uint64_t shots, std::uint64_t seed) {
  if (s.num_qubits() != kN) throw std::invalid_argument("qcnn input must have 7 qubits");
  Statevector work = s;
  build_equivalent_circuit().apply_to(work);
  std::vector<int> all_sites{1, 2, 3, 4, 5, 6, 7};
  QcnnOutcome out;
  out.shots = shots;
  out.seed = seed;
  out.dist = sample_x_basis(work, all_sites, shots, seed);
  double y_mean = 0;
  if (shots == 0) {
    for (int b = 0; b < kDim; ++b) y_mean += out.dist.p[b] * classify_bits7(b);
  } else {
    for (int b = 0; b < kDim; ++b)
      if (out.dist.counts[b]) y_mean += double(out.dist.counts[b]) * classify_bits7(b);
    y_mean /= double(shots);
  }
  out.y_expect = 2 * y_mean - 1;
  return out;
}

QcnnOutcome qcnn_output(const Eigen::MatrixXcd& rho, std::uint64_t shots, std::uint64_t seed) {
  if (rho.rows() != kDim || rho.cols() != kDim)
    throw std::invalid_argument("qcnn input must have 7 qubits");
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(kDim, kDim);
  for (const Gate& g : build_equivalent_circuit().gates) u = cz_dense(kN, g.a, g.b) * u;
  Eigen::Matrix2cd r = ry_matrix(x_basis_angle);
  Eigen::MatrixXcd rot = Eigen::MatrixXcd::Identity(kDim, kDim);
  for (int q = 1; q <= kN; ++q) rot = op_on(kN, {{q, r}}) * rot;
  u = rot * u;
  Eigen::VectorXcd diag = (u * rho * u.adjoint()).diagonal();

  QcnnOutcome out;
  out.shots = shots;
  out.seed = seed;
  out.dist.n = kN;
  out.dist.x_sites = {1, 2, 3, 4, 5, 6, 7};
  out.dist.shots = shots;
  out.dist.seed = seed;
  std::vector<double> p(kDim);
  for (int b = 0; b < kDim; ++b) p[b] = std::max(0.0, diag[b].real());
  double y_mean = 0;
  if (shots == 0) {
    out.dist.p = p;
    for (int b = 0; b < kDim; ++b) y_mean += p[b] * classify_bits7(b);
  } else {
    out.dist.counts.assign(kDim, 0);
    std::mt19937_64 rng(seed);
    for (std::uint64_t k = 0; k < shots; ++k) {
      double rr = double(rng() >> 11) * 0x1.0p-53, acc = 0;
      int pick = kDim - 1;
      for (int b = 0; b < kDim; ++b) {
        acc += p[b];
        if (rr < acc) {
          pick = b;
          break;
        }
      }
      ++out.dist.counts[pick];
    }
    out.dist.p.resize(kDim);
    for (int b = 0; b < kDim; ++b) {
      out.dist.p[b] = double(out.dist.counts[b]) / double(shots);
      y_mean += double(out.dist.counts[b]) * classify_bits7(b);
    }
    y_mean /= double(shots);
  }
  out.y_expect = 2 * y_mean - 1;
  return out;
}

double output_probability(const Eigen::MatrixXcd& rho, Form form) {
  if (form == Form::equivalent) {
    QcnnOutcome o = qcnn_output(rho, 0, 0);
    return (o.y_expect + 1) / 2;
  }
  Eigen::MatrixXcd u = (form == Form::full) ? full_unitary() : intermediate_unitary();
  Eigen::Matrix2cd pplus;
  pplus << 0.5, 0.5, 0.5, 0.5;  // |+><+|
  Eigen::MatrixXcd proj = op_on(kN, {{4, pplus}});
  return (proj * (u * rho * u.adjoint())).trace().real();
}

EquivalenceReport equivalence_check(Form a, Form b, int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  EquivalenceReport rep;
  rep.trials = trials;
  for (int t = 0; t < trials; ++t) {
    Eigen::VectorXcd v(kDim);
    for (int i = 0; i < kDim; ++i) v[i] = std::complex<double>(g(rng), g(rng));
    v.normalize();
    Eigen::MatrixXcd rho = v * v.adjoint();
    double pa = output_probability(rho, a), pb = output_probability(rho, b);
    rep.max_deviation = std::max(rep.max_deviation, std::abs(pa - pb));
  }
  return rep;
}

msop::Expansion msop_expand(int d, std::uint64_t memory_cap_bytes, bool allow_truncation,
                            msop::Part part) {
  msop::ExpandOptions opt;
  opt.d = d;
  opt.part = part;
  opt.memory_cap_bytes = memory_cap_bytes;
  opt.allow_truncation = allow_truncation;
  return msop::expand(opt);
}

}  // namespace qpr::qcnn
