// Copyright 2026 The fibstring Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include "fibstring/engine.hpp"
#include "fibstring/lattice.hpp"
#include "fibstring/mitigation.hpp"
#include "fibstring/parallel.hpp"
#include "fibstring/stringnet.hpp"
#include "fibstring/tee.hpp"

using namespace fibstring;

namespace {

const LatticeLayout& three() {
  static const LatticeLayout L = build_layout(Preset::three_plaquette_fig1b);
  return L;
}

const StateVector& three_ground() {
  static const StateVector sv = [] {
    StateVector s(28);
    prepare_ground_state(s, three());
    return s;
  }();
  return sv;
}

void BM_single_qubit_gate(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  StateVector sv(n);
  for (int k = 0; k < n; ++k) sv.alloc(QubitId{0, k});
  const Matrix u = us_gate();
  int k = 0;
  for (auto _ : state) {
    sv.apply(u, {QubitId{0, k}});
    k = (k + 1) % n;
  }
  state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << n));
}
BENCHMARK(BM_single_qubit_gate)->Arg(12)->Arg(16)->Arg(20)->Unit(benchmark::kMicrosecond);

void BM_controlled_gate(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  StateVector sv(n);
  for (int k = 0; k < n; ++k) sv.alloc(QubitId{0, k});
  const Matrix u = us_gate();
  for (auto _ : state) sv.apply(u, {QubitId{0, 0}}, {{QubitId{0, n - 1}, 0}, {QubitId{0, n / 2}, 1}});
  state.SetItemsProcessed(state.iterations() * (std::int64_t{1} << n));
}
BENCHMARK(BM_controlled_gate)->Arg(16)->Arg(20)->Unit(benchmark::kMicrosecond);

void BM_f_move(benchmark::State& state) {
  const int n = 16;
  StateVector sv(n);
  for (int k = 0; k < n; ++k) sv.alloc(QubitId{0, k});
  const QubitId t{0, 0}, a{0, 1}, b{0, 2}, c{0, 3}, d{0, 4};
  // All wires tau and target vacuum is a valid input of the full gate.
  for (const auto& q : {a, b, c, d}) sv.apply(x_gate(), {q});
  FMoveGate g{{Wire::on(a), Wire::on(b), Wire::on(c), Wire::on(d)}, t};
  for (auto _ : state) {
    f_move(sv, g);
    g.inverse = !g.inverse;
  }
}
BENCHMARK(BM_f_move)->Unit(benchmark::kMicrosecond);

void BM_ground_state_three_plaquette(benchmark::State& state) {
  for (auto _ : state) {
    StateVector sv(28);
    prepare_ground_state(sv, three());
    benchmark::DoNotOptimize(sv.amplitudes().data());
  }
}
BENCHMARK(BM_ground_state_three_plaquette)->Unit(benchmark::kMillisecond);

void BM_bp_expectation(benchmark::State& state) {
  const auto& sv = three_ground();
  for (auto _ : state) benchmark::DoNotOptimize(measure_bp(sv, three(), 0));
}
BENCHMARK(BM_bp_expectation)->Unit(benchmark::kMillisecond);

void BM_pauli_decompose_bp(benchmark::State& state) {
  const auto op = build_bp_generic();
  for (auto _ : state) {
    const auto terms = pauli_decompose(op);
    benchmark::DoNotOptimize(group_bases(terms));
  }
}
BENCHMARK(BM_pauli_decompose_bp)->Unit(benchmark::kMillisecond);

void BM_rm_purity(benchmark::State& state) {
  static const StateVector sv = tee_state(three());
  const auto region = tee_region(three());
  const std::vector<QubitId> subset(region.begin(), region.begin() + state.range(0));
  RMConfig cfg;
  cfg.instances = 20;
  cfg.seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(rm_estimate_purity(sv, subset, cfg));
}
BENCHMARK(BM_rm_purity)->Arg(5)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_ibu(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ResponseMatrix R(std::vector<Fidelity>(n, Fidelity{0.97, 0.93}));
  auto rng = rng_stream(3, 0);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  Distribution t;
  t.p.resize(R.dim());
  double s = 0;
  for (auto& x : t.p) s += x = u(rng);
  for (auto& x : t.p) x /= s;
  const auto m = apply_readout_noise(t, R);
  for (auto _ : state) benchmark::DoNotOptimize(ibu(m, R, 50));
}
BENCHMARK(BM_ibu)->Arg(4)->Arg(8)->Arg(11)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
