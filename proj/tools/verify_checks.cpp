#include "verify_checks.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "qpr/msop.hpp"
#include "qpr/noise.hpp"
#include "qpr/qcnn.hpp"
#include "qpr/simulator.hpp"
#include "qpr/spinchain.hpp"
#include "qpr/vqe.hpp"

namespace qprtool {

namespace {

using namespace qpr;

struct Reporter {
  std::vector<CheckResult> results;

  void check(const std::string& name, bool pass, const std::string& detail) {
    results.push_back({name, pass, detail});
  }
  template <typename Fn>
  void guarded(const std::string& name, Fn&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      check(name, false, std::string("exception: ") + e.what());
    }
  }
};

std::string num(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

Eigen::VectorXcd random_state(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::VectorXcd v(std::int64_t{1} << n);
  for (std::int64_t i = 0; i < v.size(); ++i) v[i] = std::complex<double>(g(rng), g(rng));
  return v / v.norm();
}

void pauli_checks(Reporter& r) {
  r.guarded("pauli.product_matches_dense", [&] {
    std::mt19937_64 rng(31);
    double worst = 0;
    for (int t = 0; t < 20; ++t) {
      PauliString a{5, rng() & 31, rng() & 31}, b{5, rng() & 31, rng() & 31};
      auto prod = mul(a, b);
      std::complex<double> ph = std::pow(std::complex<double>(0, 1), prod.phase_pow);
      worst = std::max(worst, (dense(a) * dense(b) - ph * dense(prod.p)).cwiseAbs().maxCoeff());
    }
    r.check("pauli.product_matches_dense", worst < 1e-12, num(worst));
  });
  r.guarded("pauli.parse_round_trip", [&] {
    PauliString s = PauliString::parse(7, "Z1X2X4X6Z7");
    r.check("pauli.parse_round_trip", s == string_order(7) && s.str() == "Z1X2X4X6Z7", s.str());
  });
}

void spinchain_checks(Reporter& r) {
  r.guarded("spinchain.ground_energy", [&] {
    double e = ground_state(7, 0.0, -0.2).energy;
    r.check("spinchain.ground_energy", std::abs(e - -7.0537) < 5e-4, num(e));
  });
  r.guarded("spinchain.boundaries", [&] {
    auto scan = find_boundaries(7, 0.0, -1.6, 1.6, 161);
    bool ok = scan.boundaries.size() == 2 && std::abs(scan.boundaries[0] + 0.94) < 1e-9 &&
              std::abs(scan.boundaries[1] - 0.94) < 1e-9;
    std::string d;
    for (double b : scan.boundaries) d += num(b) + " ";
    r.check("spinchain.boundaries", ok, d);
  });
}

void simulator_checks(Reporter& r) {
  r.guarded("simulator.norm_preserved", [&] {
    std::mt19937_64 rng(5);
    Statevector sv(7);
    for (int k = 0; k < 40; ++k) {
      int q = 1 + int(rng() % 7);
      sv.ry(q, double(rng() % 1000) / 500.0);
      if (q < 7) sv.cz(q, q + 1);
    }
    double n = sv.amps().norm();
    r.check("simulator.norm_preserved", std::abs(n - 1) < 1e-12, num(n));
  });
  r.guarded("simulator.x_basis_convention", [&] {
    // |-> must read out as bit 1
    Statevector sv(1);
    sv.ry(1, -3.14159265358979323846 / 2);  // |0> -> ~|->
    auto d = sample_x_basis(sv, {1}, 0, 0);
    r.check("simulator.x_basis_convention", std::abs(d.p[1] - 1) < 1e-12, num(d.p[1]));
  });
}

void msop_checks(Reporter& r, const std::string& data_dir) {
  r.guarded("msop.golden_d1_file", [&] {
    auto ex = msop::expand({.d = 1});
    std::ifstream f(data_dir + "/msop_d1.csv");
    if (!f) {
      r.check("msop.golden_d1_file", false, "missing " + data_dir + "/msop_d1.csv");
      return;
    }
    std::stringstream have;
    have << f.rdbuf();
    bool ok = have.str() == msop::to_csv(ex);
    r.check("msop.golden_d1_file", ok, ok ? "byte identical" : "golden file differs");
  });
  r.guarded("msop.counts", [&] {
    auto ex = msop::expand({.d = 1});
    bool ok = ex.terms.size() == 10 && ex.final_level_products == 25 &&
              ex.coefficient_sum() == msop::Dyadic::integer(1);
    r.check("msop.counts", ok,
            num(double(ex.terms.size())) + " terms, " + num(double(ex.final_level_products)) +
                " products");
  });
  r.guarded("msop.settings", [&] {
    auto full = msop::measurement_settings(msop::expand({.d = 1}));
    auto sum = msop::measurement_settings(msop::expand({.d = 1, .part = msop::Part::sum}));
    bool ok = full.size() == 3 && sum.size() == 2;
    r.check("msop.settings", ok, num(double(full.size())) + " / " + num(double(sum.size())));
  });
}

void qcnn_checks(Reporter& r) {
  r.guarded("qcnn.forms_agree", [&] {
    auto a = qcnn::equivalence_check(qcnn::Form::full, qcnn::Form::equivalent, 10, 77);
    auto b = qcnn::equivalence_check(qcnn::Form::full, qcnn::Form::intermediate, 10, 78);
    double worst = std::max(a.max_deviation, b.max_deviation);
    r.check("qcnn.forms_agree", worst < 1e-9, num(worst));
  });
  r.guarded("qcnn.msop_identity", [&] {
    Eigen::MatrixXcd sm = qcnn::msop_dense();
    double worst = 0;
    for (int t = 0; t < 5; ++t) {
      Eigen::VectorXcd psi = random_state(7, 100 + std::uint64_t(t));
      Eigen::MatrixXcd rho = psi * psi.adjoint();
      double via_qcnn = 2 * qcnn::output_probability(rho, qcnn::Form::full) - 1;
      double via_op = (sm * rho).trace().real();
      worst = std::max(worst, std::abs(via_qcnn - via_op));
    }
    r.check("qcnn.msop_identity", worst < 1e-9, num(worst));
  });
  r.guarded("qcnn.cluster_fixed_point", [&] {
    Statevector sv(7);
    sv.amps() = cluster_state(7);
    double y = qcnn::qcnn_output(sv).y_expect;
    r.check("qcnn.cluster_fixed_point", std::abs(y - 1) < 1e-9, num(y));
  });
}

void noise_checks(Reporter& r) {
  r.guarded("noise.channel_cptp", [&] {
    auto dev = noise::reference_device();
    double worst = 0;
    for (int q = 1; q <= 7; ++q) {
      auto ks = noise::relax_dephase_kraus(dev.t1[q - 1], dev.t2[q - 1], dev.t_1q);
      Eigen::Matrix2cd s = Eigen::Matrix2cd::Zero();
      for (const auto& k : ks) s += k.adjoint() * k;
      worst = std::max(worst, (s - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff());
    }
    for (int p = 0; p < 6; ++p) {
      auto ks = noise::chi_to_kraus(dev.chi(p));
      Eigen::Matrix4cd s = Eigen::Matrix4cd::Zero();
      for (const auto& k : ks) s += k.adjoint() * k;
      worst = std::max(worst, (s - Eigen::Matrix4cd::Identity()).cwiseAbs().maxCoeff());
    }
    r.check("noise.channel_cptp", worst < 1e-10, num(worst));
  });
  r.guarded("noise.noiseless_limit", [&] {
    noise::DeviceModel dev = noise::reference_device();
    dev.t1.fill(1e6);
    dev.t2.fill(1e6);
    dev.cz_infidelity.fill(0.0);
    for (auto& z : dev.zz_hz) z = 0;
    Circuit c = vqe::build_ansatz_circuit(std::vector<double>(19, 0.7), 1);
    noise::DensityMatrix rho = noise::simulate_noisy_circuit(c, dev);
    double f = rho.state_fidelity(c.run().amps());
    r.check("noise.noiseless_limit", std::abs(f - 1) < 1e-9, num(f));
  });
  r.guarded("noise.preselection", [&] {
    auto ps = noise::preselect(noise::reference_device());
    bool ok = std::abs(ps.acceptance - 0.8902) < 5e-4 && std::abs(ps.thermal_factor - 0.8912) < 5e-4;
    r.check("noise.preselection", ok, num(ps.acceptance) + " / " + num(ps.thermal_factor));
  });
  r.guarded("noise.mitigation_inverse", [&] {
    auto dev = noise::reference_device();
    std::vector<double> p(128, 0.0);
    p[0] = 0.25;
    p[77] = 0.5;
    p[127] = 0.25;
    auto back = noise::mitigate_all(dev, noise::apply_confusion_all(dev, p));
    double worst = 0, sum = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      worst = std::max(worst, std::abs(back[i] - p[i]));
      sum += back[i];
    }
    r.check("noise.mitigation_inverse", worst < 1e-9 && std::abs(sum - 1) < 1e-9, num(worst));
  });
}

void vqe_checks(Reporter& r) {
  r.guarded("vqe.canonical_cluster", [&] {
    std::vector<double> th(19, 0.0);
    for (int i = 0; i < 7; ++i) th[i] = 3.14159265358979323846 / 2;
    double f = fidelity(cluster_state(7), vqe::build_ansatz_circuit(th, 1).run().amps());
    r.check("vqe.canonical_cluster", std::abs(f - 1) < 1e-12, num(f));
  });
  r.guarded("vqe.gradient_matches_fd", [&] {
    WeightedPauliSum h = cluster_ising(7, 0.3, -0.4);
    std::mt19937_64 rng(9);
    std::vector<double> th(19);
    for (auto& a : th) a = double(rng() % 2000) / 1000.0 - 1.0;
    auto g = vqe::ansatz_gradient(th, h, 1);
    double worst = 0;
    for (std::size_t i = 0; i < th.size(); ++i) {
      auto tp = th, tm = th;
      tp[i] += 1e-5;
      tm[i] -= 1e-5;
      double fd = (vqe::ansatz_energy(tp, h, 1) - vqe::ansatz_energy(tm, h, 1)) / 2e-5;
      worst = std::max(worst, std::abs(fd - g[i]));
    }
    r.check("vqe.gradient_matches_fd", worst < 1e-6, num(worst));
  });
  r.guarded("vqe.rewrite_identity", [&] {
    std::mt19937_64 rng(12);
    double worst = 0;
    bool in_range = true;
    for (int t = 0; t < 10; ++t) {
      std::vector<double> th(19);
      for (auto& a : th) {
        double u = double(rng() >> 11) * 0x1.0p-53;
        a = 3.14159265358979323846 * (1 - 2 * u);
      }
      auto rw = vqe::rewrite_angles(th);
      for (int i = 0; i < 7; ++i)
        in_range = in_range && std::abs(rw.theta[std::size_t(i)]) <= 3.14159265358979323846 / 2 + 1e-12;
      auto a = vqe::build_ansatz_circuit(th, 1).run();
      auto b = vqe::build_ansatz_circuit(rw.theta, 1).run();
      worst = std::max(worst, std::abs(1 - fidelity(a.amps(), b.amps())));
    }
    r.check("vqe.rewrite_identity", worst < 1e-10 && in_range, num(worst));
  });
}

}  // namespace

std::vector<CheckResult> run_verify_checks(const std::string& data_dir) {
  Reporter r;
  pauli_checks(r);
  spinchain_checks(r);
  simulator_checks(r);
  msop_checks(r, data_dir);
  qcnn_checks(r);
  noise_checks(r);
  vqe_checks(r);
  return r.results;
}

}  // namespace qprtool
