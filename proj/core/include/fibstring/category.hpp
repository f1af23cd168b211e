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
#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace fibstring {

using cplx = std::complex<double>;

/// String type. Both labels are self-dual.
enum Label : int { kVac = 0, kTau = 1 };

inline constexpr double kPhi = 1.6180339887498948482;
inline constexpr double kPi = 3.14159265358979323846;

/// Which solution of the hexagon equation is used for R.
enum class Chirality { standard, conjugate };

/// Fusion rules, quantum dimensions, F and R tables of the Fibonacci category.
///
/// F^{abe}_{cdf} is stored at index a<<5 | b<<4 | e<<3 | c<<2 | d<<1 | f and is
/// nonzero only when the triples (a,b,e), (c,d,e), (a,d,f), (b,c,f) all obey
/// the branching rule.
class CategoryData {
 public:
  explicit CategoryData(Chirality chirality = Chirality::standard);

  static const CategoryData& fibonacci();

  static int delta(int i, int j, int k);
  static double qdim(int a);
  /// v_a = sqrt(d_a).
  static double vdim(int a);
  /// Sum of d_a^2 over both labels, 1 + phi^2.
  static double total_dimension_squared();

  static constexpr int f_index(int a, int b, int e, int c, int d, int f) {
    return a << 5 | b << 4 | e << 3 | c << 2 | d << 1 | f;
  }

  double f(int a, int b, int e, int c, int d, int f) const {
    return f_[f_index(a, b, e, c, d, f)];
  }
  cplx r(int a, int b, int c) const { return r_[a << 2 | b << 1 | c]; }
  /// B^{abe}_{cdg} = sum_f F^{adf}_{bcg} R^f_{bc} F^{abe}_{cdf}.
  cplx b(int a, int b, int e, int c, int d, int g) const;

  Chirality chirality() const { return chirality_; }
  const std::array<double, 64>& f_table() const { return f_; }

  /// Copy with one F entry shifted by `delta`. Used by fault-injection tests.
  CategoryData with_f_perturbed(int index, double delta) const;

 private:
  Chirality chirality_;
  std::array<double, 64> f_{};
  std::array<cplx, 8> r_{};
};

double quantum_dimension(Label a);
int branching_delta(Label i, Label j, Label k);
double f_symbol(Label a, Label b, Label e, Label c, Label d, Label f);
cplx r_symbol(Label a, Label b, Label c);
cplx b_tensor(Label a, Label b, Label e, Label c, Label d, Label g);

/// U_F, the tau-tau-tau-tau block of F with rows e and columns f.
Eigen::Matrix2d f_block_tau();

/// Max absolute residual per constraint family.
struct CategoryReport {
  double pentagon = 0;
  double unitarity = 0;
  double tetrahedral = 0;
  double normalization = 0;
  double physicality = 0;
  double f_block_unitarity = 0;
  double b_unitarity = 0;
  double yang_baxter = 0;

  double max_residual() const;
  /// Flat key -> value record, including the four nontrivial F values.
  std::map<std::string, double> to_record(const CategoryData& cat) const;
};

CategoryReport verify_category(const CategoryData& cat = CategoryData::fibonacci());

/// Braid generators on the fusion space of four tau anyons with basis
/// (|0>, |1>) = both pairs fusing to vacuum / to tau.
struct BraidRep {
  Eigen::Matrix2cd sigma1;
  Eigen::Matrix2cd sigma2;
};

BraidRep braid_generators(const CategoryData& cat = CategoryData::fibonacci());

enum class Generator { s1, s2 };
using BraidWord = std::vector<Generator>;

/// Parses "s2,s1,s2". Blank input is the empty word. Throws std::invalid_argument.
BraidWord parse_braid_word(std::string_view text);
std::string format_braid_word(const BraidWord& word);

struct LogicalState {
  cplx c0{1.0, 0.0};
  cplx c1{0.0, 0.0};

  static LogicalState zero() { return {}; }
  static LogicalState one() { return {cplx{0, 0}, cplx{1, 0}}; }
};

/// Applies the operator product of the word: [s1, s2] acts as sigma1 * sigma2,
/// so the rightmost letter acts on the state first.
LogicalState apply_braid_word(const BraidWord& word, const LogicalState& init,
                              const BraidRep& rep = braid_generators());

struct FusionProbabilities {
  double vac = 0;
  double tau = 0;
};

FusionProbabilities fusion_probabilities(const LogicalState& state);

/// <0|sigma2 sigma2|0>, real and equal to -1/phi^2.
double monodromy_element(const BraidRep& rep = braid_generators());
/// sqrt(-1/m). Throws std::domain_error for m >= 0.
double quantum_dimension_from_monodromy(double m);

}  // namespace fibstring
