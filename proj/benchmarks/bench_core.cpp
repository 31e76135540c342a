#include <benchmark/benchmark.h>

#include <memory>
#include <random>
#include <vector>

#include "spinent/eigensolver.hpp"
#include "spinent/entanglement.hpp"
#include "spinent/models.hpp"
#include "spinent/observables.hpp"

using namespace spinent;

namespace {

std::shared_ptr<const SectorBasis> zero_sector(int n) {
  return std::make_shared<const SectorBasis>(LatticeSpec::chain(n), 0);
}

void BM_ApplyXXZ(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const HamiltonianOperator h(ModelSpec::xxz(0.5), zero_sector(n));
  std::vector<double> in(h.dimension(), 1.0), out(h.dimension());
  for (auto _ : state) {
    h.apply(in, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(h.dimension()));
}
BENCHMARK(BM_ApplyXXZ)->Arg(12)->Arg(16)->Arg(20);

void BM_ApplyJ1J2(benchmark::State& state) {
  const HamiltonianOperator h(ModelSpec::j1j2(1.0, 0.4), zero_sector(static_cast<int>(state.range(0))));
  std::vector<double> in(h.dimension(), 1.0), out(h.dimension());
  for (auto _ : state) {
    h.apply(in, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_ApplyJ1J2)->Arg(16);

void BM_LanczosLowest3(benchmark::State& state) {
  const HamiltonianOperator h(ModelSpec::xxz(1.0), zero_sector(static_cast<int>(state.range(0))));
  const LinearOperator op = [&h](std::span<const double> x, std::span<double> y) { h.apply(x, y); };
  for (auto _ : state) {
    auto sol = lanczos_lowest_k(op, h.dimension(), 3);
    benchmark::DoNotOptimize(sol.energies.data());
  }
}
BENCHMARK(BM_LanczosLowest3)->Arg(12)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_DenseSpectrum(benchmark::State& state) {
  const Eigen::MatrixXd m = hamiltonian_dense(ModelSpec::xxz(1.0), zero_sector(static_cast<int>(state.range(0))));
  for (auto _ : state) {
    auto sol = dense_spectrum(m);
    benchmark::DoNotOptimize(sol.energies.data());
  }
}
BENCHMARK(BM_DenseSpectrum)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_TwoSiteRdm(benchmark::State& state) {
  auto basis = zero_sector(16);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  std::vector<double> amp(basis->dimension());
  for (auto& a : amp) a = g(rng);
  StateVector v(basis, amp);
  v.normalize();
  for (auto _ : state) {
    auto rdm = two_site_rdm(v, 0, 1);
    benchmark::DoNotOptimize(rdm.entries.data());
  }
}
BENCHMARK(BM_TwoSiteRdm);

void BM_Wootters(benchmark::State& state) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  Eigen::Matrix4d a;
  for (int i = 0; i < 16; ++i) a.data()[i] = g(rng);
  Eigen::Matrix4d rho = a * a.transpose();
  rho /= rho.trace();
  for (auto _ : state) {
    auto c = wootters_concurrence(rho);
    benchmark::DoNotOptimize(c.value);
  }
}
BENCHMARK(BM_Wootters);

}  // namespace

BENCHMARK_MAIN();
