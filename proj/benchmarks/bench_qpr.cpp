#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "qpr/msop.hpp"
#include "qpr/noise.hpp"
#include "qpr/qcnn.hpp"
#include "qpr/simulator.hpp"
#include "qpr/spinchain.hpp"
#include "qpr/vqe.hpp"

namespace {

using namespace qpr;

// one Ry sweep plus a CZ ladder over the whole register
void BM_StatevectorLayer(benchmark::State& state) {
  int n = int(state.range(0));
  Statevector sv(n);
  double angle = 0.3;
  for (auto _ : state) {
    for (int q = 1; q <= n; ++q) sv.ry(q, angle);
    for (int q = 1; q < n; ++q) sv.cz(q, q + 1);
    benchmark::DoNotOptimize(sv.amps().data());
    angle = -angle;  // keep the norm exercise honest
  }
  state.SetItemsProcessed(state.iterations() * (2 * n - 1));
}
BENCHMARK(BM_StatevectorLayer)->Arg(7)->Arg(12)->Arg(16)->Arg(20);

void BM_AnsatzRun(benchmark::State& state) {
  std::vector<double> theta(19, 0.7);
  Circuit c = vqe::build_ansatz_circuit(theta, 1);
  for (auto _ : state) {
    Statevector sv = c.run();
    benchmark::DoNotOptimize(sv.amps().data());
  }
}
BENCHMARK(BM_AnsatzRun);

void BM_RelaxationChannelChain(benchmark::State& state) {
  noise::DeviceModel dev = noise::reference_device();
  noise::DensityMatrix rho(7);
  for (auto _ : state) {
    for (int q = 1; q <= 7; ++q)
      noise::relax_dephase_channel(rho, q, dev.t1[q - 1], dev.t2[q - 1], dev.t_1q);
    benchmark::DoNotOptimize(rho.mat().data());
  }
  state.SetItemsProcessed(state.iterations() * 7);
}
BENCHMARK(BM_RelaxationChannelChain);

void BM_ChiProcess(benchmark::State& state) {
  noise::DeviceModel dev = noise::reference_device();
  noise::Chi chi = dev.chi(2);
  noise::DensityMatrix rho(7);
  for (auto _ : state) {
    noise::apply_chi_process(rho, 3, 4, chi);
    benchmark::DoNotOptimize(rho.mat().data());
  }
}
BENCHMARK(BM_ChiProcess);

void BM_NoisyPreparation(benchmark::State& state) {
  noise::NoisyEngine eng(noise::reference_device());
  std::vector<double> theta(19, 0.0);
  for (int i = 0; i < 7; ++i) theta[std::size_t(i)] = 1.5707963267948966;
  Circuit c = vqe::build_ansatz_circuit(theta, 1);
  for (auto _ : state) {
    noise::DensityMatrix rho = eng.prepare(c);
    benchmark::DoNotOptimize(rho.mat().data());
  }
}
BENCHMARK(BM_NoisyPreparation);

void BM_ExpandDepthOne(benchmark::State& state) {
  for (auto _ : state) {
    msop::Expansion ex = msop::expand({.d = 1});
    benchmark::DoNotOptimize(ex.terms.data());
  }
}
BENCHMARK(BM_ExpandDepthOne);

// the heavy merge path: thousands of branches folding into a sorted term map
void BM_ExpandDepthTwoSum(benchmark::State& state) {
  std::uint64_t terms = 0;
  for (auto _ : state) {
    msop::Expansion ex = msop::expand({.d = 2, .part = msop::Part::sum});
    terms = ex.terms.size();
    benchmark::DoNotOptimize(ex.terms.data());
  }
  state.counters["terms"] = double(terms);
}
BENCHMARK(BM_ExpandDepthTwoSum)->Unit(benchmark::kMillisecond);

void BM_QcnnOutputExact(benchmark::State& state) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  Statevector sv(7);
  for (auto& a : sv.amps()) a = std::complex<double>(g(rng), g(rng));
  sv.amps() /= sv.amps().norm();
  for (auto _ : state) {
    auto out = qcnn::qcnn_output(sv);
    benchmark::DoNotOptimize(out.y_expect);
  }
}
BENCHMARK(BM_QcnnOutputExact);

void BM_GradientStep(benchmark::State& state) {
  WeightedPauliSum h = cluster_ising(7, 0.3, -0.4);
  std::vector<double> theta(19, 0.4);
  for (auto _ : state) {
    auto g = vqe::ansatz_gradient(theta, h, 1);
    benchmark::DoNotOptimize(g.data());
  }
}
BENCHMARK(BM_GradientStep);

}  // namespace

BENCHMARK_MAIN();
