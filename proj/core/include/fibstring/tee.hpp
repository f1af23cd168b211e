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

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "fibstring/category.hpp"
#include "fibstring/engine.hpp"
#include "fibstring/lattice.hpp"
#include "fibstring/mitigation.hpp"

namespace fibstring {

enum class Ensemble { haar, clifford };

Ensemble parse_ensemble(std::string_view name);
std::string to_string(Ensemble e);

struct RMConfig {
  Ensemble ensemble = Ensemble::haar;
  int instances = 1500;
  std::uint64_t shots = 300000;
  /// Exact per-instance probabilities instead of finite shots.
  bool exact = true;
  std::uint64_t seed = 0;
  std::optional<ReadoutModel> noise;
  bool mitigate = false;
  int ibu_iterations = 50;
  int bootstrap = 200;

  /// Throws std::invalid_argument.
  void validate() const;
};

/// CX from each source onto its freshly allocated target.
void copy_boundary(StateVector& sv, const std::vector<CopyPair>& map);

/// Three-plaquette ground state reduced to the TEE region: legs are freed
/// (they stay in |0>) and the boundary copies are added, 18 qubits in all.
StateVector tee_state(const LatticeLayout& layout, const CategoryData& cat = CategoryData::fibonacci());

/// The seven regions of a scheme in the order A, B, C, AB, BC, AC, ABC.
std::array<std::vector<QubitId>, 7> scheme_regions(const PartitionScheme& s);
/// S_A + S_B + S_C - S_AB - S_BC - S_AC + S_ABC from seven entropies.
double combine_stopo(const std::array<double, 7>& s);

/// Exact second-Renyi S_topo of one scheme.
double stopo_exact(const StateVector& sv, const PartitionScheme& scheme);
/// Same combination with von Neumann entropies.
double stopo_exact_vn(const StateVector& sv, const PartitionScheme& scheme);

/// -j ln D - n sum_k (d_k^2 / D) ln(d_k / D) with D = 1 + phi^2.
double predicted_entropy(int n, int j);
/// Per-string coefficient of the area term.
double area_alpha();

struct RegionEntropy {
  std::vector<QubitId> qubits;
  int n = 0;
  int j = 0;
  double s2 = 0;
  double stderr_ = 0;
  double predicted = 0;
  double residual() const { return s2 - predicted; }
};

struct SchemeEstimate {
  int orientation = 0;
  int division = 0;
  /// Indices into EntropyReport::regions, order A, B, C, AB, BC, AC, ABC.
  std::array<int, 7> region{};
  double stopo = 0;
  double stderr_ = 0;
};

struct EntropyReport {
  std::string mode;
  std::vector<RegionEntropy> regions;
  std::vector<SchemeEstimate> schemes;
  double mean = 0;
  double mean_stderr = 0;
  std::vector<std::string> flags;

  std::string to_json() const;
  /// One row per region: region,qubits,n,j,s2,stderr,predicted,residual.
  std::string regions_csv() const;
  /// One row per scheme: orientation,division,stopo,stderr.
  std::string schemes_csv() const;
};

/// Exact S_2 for every region of every scheme.
EntropyReport exact_report(const StateVector& sv, const LatticeLayout& layout);

/// Haar: three-angle form with sin^2(theta) uniform. Clifford: one of the 24
/// single-qubit Clifford rotations, uniformly.
Matrix sample_random_unitary(Ensemble ensemble, std::mt19937_64& rng);
/// The 24 Clifford rotations, fixed order, global phase removed.
const std::vector<Matrix>& clifford_group();

struct PurityEstimate {
  double purity = 0;
  double s2 = 0;
  double stderr_ = 0;
};

/// Randomized-measurement estimate of Tr rho^2 on one subset.
PurityEstimate rm_estimate_purity(const StateVector& sv, const std::vector<QubitId>& subset, const RMConfig& cfg);

/// One randomized dataset over the whole TEE region, reused for every region
/// of the nine schemes.
EntropyReport rm_stopo(const StateVector& sv, const LatticeLayout& layout, const RMConfig& cfg);

struct EnsembleComparison {
  Ensemble ensemble = Ensemble::haar;
  double exact = 0;
  std::vector<double> estimates;
  /// Mean |estimate - exact| over repetitions.
  double mean_abs_error = 0;
  /// Sample variance of the estimates over repetitions.
  double variance = 0;
};

/// Paired repetitions of rm_estimate_purity: repetition r uses the same
/// stream seed for both ensembles.
std::array<EnsembleComparison, 2> compare_ensembles(const StateVector& sv, const std::vector<QubitId>& subset,
                                                    int instances, int repetitions, std::uint64_t seed);

}  // namespace fibstring
