#include "qpr/qcnn.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "qpr/spinchain.hpp"
#include "testutil.hpp"

using namespace qpr;
namespace tu = qpr::testutil;

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::MatrixXcd pauli7(const char* s) { return dense(PauliString::parse(7, s)); }

Statevector cluster_sv() {
  Statevector s(7);
  s.amps() = cluster_state(7);
  return s;
}

Eigen::MatrixXcd equivalent_unitary() {
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(128, 128);
  Circuit c = qcnn::build_equivalent_circuit(7);
  for (const Gate& g : c.gates) u = qcnn::cz_dense(7, g.a, g.b) * u;
  return u;
}

Eigen::MatrixXcd x_readout_rotation() {
  Eigen::MatrixXcd r(1, 1);
  r(0, 0) = 1;
  Eigen::Matrix2cd ry = ry_matrix(x_basis_angle);
  for (int q = 0; q < 7; ++q) r = tu::kron(r, ry);
  return r;
}

}  // namespace

TEST(Qcnn, LayerUnitariesAreUnitary) {
  for (const Eigen::MatrixXcd& u :
       {qcnn::conv_unitary(), qcnn::pool_unitary(), qcnn::fc_unitary(), qcnn::full_unitary()}) {
    EXPECT_LT((u.adjoint() * u - Eigen::MatrixXcd::Identity(128, 128)).cwiseAbs().maxCoeff(),
              1e-12);
  }
}

TEST(Qcnn, FcLayerObservableIdentity) {
  Eigen::MatrixXcd fc = qcnn::fc_unitary();
  Eigen::MatrixXcd lhs = fc.adjoint() * pauli7("X4") * fc;
  Eigen::MatrixXcd rhs = 0.5 * (pauli7("Z1X4Z7") + pauli7("X1Z4") + pauli7("Z4X7") +
                                pauli7("Y1X4Y7"));
  EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Qcnn, ToffoliCommutationIdentity) {
  Eigen::MatrixXcd cz47 = qcnn::cz_dense(7, 4, 7);
  Eigen::Matrix2cd x = tu::sigma('X'), z = tu::sigma('Z');
  Eigen::MatrixXcd toff = qcnn::controlled_op(7, {3, 5}, {}, {{4, x}});
  Eigen::MatrixXcd ccz = qcnn::controlled_op(7, {3, 5}, {}, {{7, z}});
  EXPECT_LT((cz47 * toff - toff * ccz * cz47).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Qcnn, ControlledOpConventions) {
  // plain CNOT with a Z-basis control
  Eigen::MatrixXcd cnot = qcnn::controlled_op(2, {}, {1}, {{2, tu::sigma('X')}});
  Eigen::Matrix4cd want;
  want << 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0;
  EXPECT_LT((cnot - want).cwiseAbs().maxCoeff(), 1e-14);

  // X-basis control activates on |->
  Eigen::MatrixXcd cxnot = qcnn::controlled_op(2, {1}, {}, {{2, tu::sigma('X')}});
  Eigen::Vector4cd plus0(1, 0, 1, 0), minus0(1, 0, -1, 0), minus1(0, 1, 0, -1);
  plus0 /= std::sqrt(2.0);
  minus0 /= std::sqrt(2.0);
  minus1 /= std::sqrt(2.0);
  EXPECT_LT((cxnot * plus0 - plus0).norm(), 1e-12);
  EXPECT_LT((cxnot * minus0 - minus1).norm(), 1e-12);
}

TEST(Qcnn, MsopDenseMatchesSymbolicExpansion) {
  Eigen::MatrixXcd sym = msop::to_matrix(qcnn::msop_expand(1));
  EXPECT_LT((sym - qcnn::msop_dense()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Qcnn, DiagonalizationOracle) {
  // push the observable through the CZ layers and the readout rotation; the
  // result must be the +-1 diagonal that classify_bits7 encodes
  Eigen::MatrixXcd ru = x_readout_rotation() * equivalent_unitary();
  Eigen::VectorXcd f(128);
  for (int b = 0; b < 128; ++b) f[b] = 2 * qcnn::classify_bits7(b) - 1;
  Eigen::MatrixXcd m = ru.adjoint() * Eigen::MatrixXcd(f.asDiagonal()) * ru;
  EXPECT_LT((m - qcnn::msop_dense()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Qcnn, DiagonalFormIsPlusMinusOne) {
  for (int v = 0; v < 32; ++v) {
    std::array<int, 5> x{(v >> 4) & 1, (v >> 3) & 1, (v >> 2) & 1, (v >> 1) & 1, v & 1};
    int d = qcnn::diagonal_form(x);
    EXPECT_TRUE(d == 1 || d == -1);
    EXPECT_EQ(qcnn::classify_bits(x), (1 + d) / 2);
  }
}

TEST(Qcnn, ClassifierExamples) {
  // x = (x1, x3, x4, x5, x7)
  EXPECT_EQ(qcnn::classify_bits({0, 0, 0, 0, 0}), 1);
  EXPECT_EQ(qcnn::classify_bits({1, 0, 0, 0, 0}), 1);
  EXPECT_EQ(qcnn::classify_bits({0, 0, 1, 0, 0}), 1);
  EXPECT_EQ(qcnn::classify_bits({0, 0, 0, 1, 1}), 1);
  EXPECT_EQ(qcnn::classify_bits({1, 0, 0, 1, 0}), 0);
}

TEST(Qcnn, ClassifierIgnoresSitesTwoAndSix) {
  for (std::uint64_t b = 0; b < 128; ++b) {
    int y = qcnn::classify_bits7(b);
    EXPECT_EQ(qcnn::classify_bits7(b ^ (1u << 5)), y);  // site 2
    EXPECT_EQ(qcnn::classify_bits7(b ^ (1u << 1)), y);  // site 6
  }
}

TEST(Qcnn, FormsAgreeOnRandomStates) {
  using qcnn::Form;
  auto r1 = qcnn::equivalence_check(Form::full, Form::equivalent, 50, 1234);
  auto r2 = qcnn::equivalence_check(Form::full, Form::intermediate, 50, 1234);
  auto r3 = qcnn::equivalence_check(Form::intermediate, Form::equivalent, 50, 1234);
  EXPECT_EQ(r1.trials, 50);
  EXPECT_LT(r1.max_deviation, 1e-9);
  EXPECT_LT(r2.max_deviation, 1e-9);
  EXPECT_LT(r3.max_deviation, 1e-9);
}

TEST(Qcnn, FormsAgreeOnBasisStates) {
  using qcnn::Form;
  for (int b = 0; b < 128; ++b) {
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(128, 128);
    rho(b, b) = 1;
    double pf = qcnn::output_probability(rho, Form::full);
    double pi = qcnn::output_probability(rho, Form::intermediate);
    double pe = qcnn::output_probability(rho, Form::equivalent);
    EXPECT_NEAR(pf, pe, 1e-9) << "basis state " << b;
    EXPECT_NEAR(pi, pe, 1e-9) << "basis state " << b;
  }
}

TEST(Qcnn, ClusterStateFixedPoint) {
  qcnn::QcnnOutcome out = qcnn::qcnn_output(cluster_sv());
  EXPECT_NEAR(out.y_expect, 1.0, 1e-12);
  // the disentangled register reads all zeros
  EXPECT_NEAR(out.dist.p[0], 1.0, 1e-12);
}

TEST(Qcnn, SingleErrorsAllCorrected) {
  for (int q = 1; q <= 7; ++q) {
    Statevector sx = cluster_sv();
    sx.x(q);
    EXPECT_NEAR(qcnn::qcnn_output(sx).y_expect, 1.0, 1e-9) << "X" << q;
    Statevector sz = cluster_sv();
    sz.z(q);
    EXPECT_NEAR(qcnn::qcnn_output(sz).y_expect, 1.0, 1e-9) << "Z" << q;
  }
}

TEST(Qcnn, DirectStringOrderOnlyFlagsAnticommutingErrors) {
  WeightedPauliSum sop{7, {{1.0, string_order(7)}}};
  // the string observable is Z1 X2 X4 X6 Z7: a single-site error flips the
  // readout to -1 exactly when it anticommutes with that factor
  for (int q : {2, 4, 6}) {
    Statevector s = cluster_sv();
    s.z(q);
    EXPECT_NEAR(s.expectation(sop), -1.0, 1e-12) << "Z" << q;
  }
  for (int q : {1, 7}) {
    Statevector s = cluster_sv();
    s.x(q);
    EXPECT_NEAR(s.expectation(sop), -1.0, 1e-12) << "X" << q;
  }
  // X on the interior support commutes with the string, so it slips through
  for (int q : {2, 4, 6}) {
    Statevector s = cluster_sv();
    s.x(q);
    EXPECT_NEAR(s.expectation(sop), 1.0, 1e-12) << "X" << q;
  }
}

TEST(Qcnn, OutputMatchesObservableOnMixedStates) {
  Eigen::MatrixXcd m = qcnn::msop_dense();
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    Eigen::MatrixXcd rho = tu::random_mixed_state(7, 1 + int(rng() % 4), rng);
    double want = (m * rho).trace().real();
    EXPECT_NEAR(qcnn::qcnn_output(rho).y_expect, want, 1e-9);
  }
}

TEST(Qcnn, OutputMatchesObservableOnBasisStates) {
  Eigen::MatrixXcd m = qcnn::msop_dense();
  for (int b = 0; b < 128; ++b) {
    Statevector s(7);
    s.amps().setZero();
    s.amps()[b] = 1;
    EXPECT_NEAR(qcnn::qcnn_output(s).y_expect, m(b, b).real(), 1e-9) << b;
  }
}

TEST(Qcnn, ParamagneticFixedPointIsUndecided) {
  Statevector plus(7);
  plus.amps().setConstant(1.0 / std::sqrt(128.0));
  qcnn::QcnnOutcome out = qcnn::qcnn_output(plus);
  EXPECT_NEAR(out.y_expect, 0.0, 1e-12);
  Eigen::MatrixXcd rho = plus.amps() * plus.amps().adjoint();
  EXPECT_NEAR(qcnn::output_probability(rho, qcnn::Form::equivalent), 0.5, 1e-12);
}

TEST(Qcnn, OutputStaysInRange) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    Statevector s(7);
    s.amps() = tu::random_state(7, rng);
    double y = qcnn::qcnn_output(s).y_expect;
    EXPECT_GE(y, -1.0 - 1e-12);
    EXPECT_LE(y, 1.0 + 1e-12);
  }
}

TEST(Qcnn, SampledModeIsSeededAndConsistent) {
  std::mt19937_64 rng(13);
  Statevector s(7);
  s.amps() = tu::random_state(7, rng);
  double exact = qcnn::qcnn_output(s).y_expect;
  qcnn::QcnnOutcome a = qcnn::qcnn_output(s, 20000, 5);
  qcnn::QcnnOutcome b = qcnn::qcnn_output(s, 20000, 5);
  EXPECT_EQ(a.y_expect, b.y_expect);
  EXPECT_EQ(a.shots, 20000u);
  std::uint64_t total = 0;
  for (auto c : a.dist.counts) total += c;
  EXPECT_EQ(total, 20000u);
  EXPECT_NEAR(a.y_expect, exact, 0.05);
  qcnn::QcnnOutcome c = qcnn::qcnn_output(s, 20000, 6);
  EXPECT_NE(a.y_expect, c.y_expect);
}

TEST(Qcnn, EquivalentCircuitShape) {
  Circuit c = qcnn::build_equivalent_circuit(7);
  ASSERT_EQ(c.gates.size(), 6u);
  const std::pair<int, int> want[6] = {{1, 2}, {3, 4}, {5, 6}, {2, 3}, {4, 5}, {6, 7}};
  for (int i = 0; i < 6; ++i) {
    EXPECT_EQ(c.gates[i].kind, Gate::CZ);
    EXPECT_EQ(c.gates[i].a, want[i].first);
    EXPECT_EQ(c.gates[i].b, want[i].second);
  }
  EXPECT_THROW(qcnn::build_equivalent_circuit(6), std::invalid_argument);
}

TEST(Qcnn, MsopExpandWrapperMatchesEngine) {
  msop::Expansion a = qcnn::msop_expand(1);
  msop::Expansion b = msop::expand({.d = 1});
  ASSERT_EQ(a.terms.size(), b.terms.size());
  for (std::size_t i = 0; i < a.terms.size(); ++i) {
    EXPECT_EQ(a.terms[i].idx, b.terms[i].idx);
    EXPECT_EQ(a.terms[i].coef, b.terms[i].coef);
  }
}
