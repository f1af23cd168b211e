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

#include "fibstring/category.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fibstring {

namespace {

cplx phase(double turns_of_pi) {
  return {std::cos(turns_of_pi * kPi), std::sin(turns_of_pi * kPi)};
}

bool admissible(int a, int b, int e, int c, int d, int f) {
  return CategoryData::delta(a, b, e) && CategoryData::delta(c, d, e) &&
         CategoryData::delta(a, d, f) && CategoryData::delta(b, c, f);
}

}  // namespace

CategoryData::CategoryData(Chirality chirality) : chirality_(chirality) {
  const Eigen::Matrix2d uf = f_block_tau();
  for (int i = 0; i < 64; ++i) {
    int a = i >> 5 & 1, b = i >> 4 & 1, e = i >> 3 & 1;
    int c = i >> 2 & 1, d = i >> 1 & 1, f = i & 1;
    if (!admissible(a, b, e, c, d, f)) {
      f_[i] = 0.0;
    } else if (a && b && c && d) {
      f_[i] = uf(e, f);
    } else {
      f_[i] = 1.0;
    }
  }
  for (int i = 0; i < 8; ++i) {
    int a = i >> 2 & 1, b = i >> 1 & 1, c = i & 1;
    if (!delta(a, b, c)) {
      r_[i] = 0.0;
    } else if (a == kVac || b == kVac) {
      r_[i] = 1.0;
    } else {
      r_[i] = c == kVac ? phase(-4.0 / 5.0) : phase(3.0 / 5.0);
    }
    if (chirality == Chirality::conjugate) r_[i] = std::conj(r_[i]);
  }
}

const CategoryData& CategoryData::fibonacci() {
  static const CategoryData instance;
  return instance;
}

int CategoryData::delta(int i, int j, int k) {
  // Only 001 and its permutations are forbidden.
  return (i + j + k) != 1 ? 1 : 0;
}

double CategoryData::qdim(int a) { return a == kVac ? 1.0 : kPhi; }

double CategoryData::vdim(int a) { return std::sqrt(qdim(a)); }

double CategoryData::total_dimension_squared() { return 1.0 + kPhi * kPhi; }

cplx CategoryData::b(int a, int b, int e, int c, int d, int g) const {
  cplx s = 0.0;
  for (int f = 0; f < 2; ++f) {
    s += this->f(a, d, f, b, c, g) * r(b, c, f) * this->f(a, b, e, c, d, f);
  }
  return s;
}

CategoryData CategoryData::with_f_perturbed(int index, double delta) const {
  if (index < 0 || index >= 64) throw std::out_of_range("F index out of range");
  CategoryData out = *this;
  out.f_[index] += delta;
  return out;
}

double quantum_dimension(Label a) { return CategoryData::qdim(a); }

int branching_delta(Label i, Label j, Label k) { return CategoryData::delta(i, j, k); }

double f_symbol(Label a, Label b, Label e, Label c, Label d, Label f) {
  return CategoryData::fibonacci().f(a, b, e, c, d, f);
}

cplx r_symbol(Label a, Label b, Label c) { return CategoryData::fibonacci().r(a, b, c); }

cplx b_tensor(Label a, Label b, Label e, Label c, Label d, Label g) {
  return CategoryData::fibonacci().b(a, b, e, c, d, g);
}

Eigen::Matrix2d f_block_tau() {
  const double ip = 1.0 / kPhi;
  const double isp = 1.0 / std::sqrt(kPhi);
  Eigen::Matrix2d u;
  u << ip, isp, isp, -ip;
  return u;
}

double CategoryReport::max_residual() const {
  return std::max({pentagon, unitarity, tetrahedral, normalization, physicality,
                   f_block_unitarity, b_unitarity, yang_baxter});
}

std::map<std::string, double> CategoryReport::to_record(const CategoryData& cat) const {
  return {
      {"pentagon", pentagon},
      {"unitarity", unitarity},
      {"tetrahedral", tetrahedral},
      {"normalization", normalization},
      {"physicality", physicality},
      {"f_block_unitarity", f_block_unitarity},
      {"b_unitarity", b_unitarity},
      {"yang_baxter", yang_baxter},
      {"F_tt1_tt1", cat.f(1, 1, 0, 1, 1, 0)},
      {"F_tt1_ttt", cat.f(1, 1, 0, 1, 1, 1)},
      {"F_ttt_tt1", cat.f(1, 1, 1, 1, 1, 0)},
      {"F_ttt_ttt", cat.f(1, 1, 1, 1, 1, 1)},
  };
}

CategoryReport verify_category(const CategoryData& cat) {
  CategoryReport rep;
  auto F = [&](int a, int b, int e, int c, int d, int f) { return cat.f(a, b, e, c, d, f); };
  auto v = [](int a) { return CategoryData::vdim(a); };
  const auto& D = CategoryData::delta;

  for (int m = 0; m < 2; ++m)
  for (int l = 0; l < 2; ++l)
  for (int q = 0; q < 2; ++q)
  for (int k = 0; k < 2; ++k)
  for (int p = 0; p < 2; ++p)
  for (int j = 0; j < 2; ++j)
  for (int i = 0; i < 2; ++i)
  for (int s = 0; s < 2; ++s)
  for (int r = 0; r < 2; ++r) {
    double lhs = 0;
    for (int n = 0; n < 2; ++n) lhs += F(m, l, q, k, p, n) * F(j, i, p, m, n, s) * F(j, s, n, l, k, r);
    double rhs = F(j, i, p, q, k, r) * F(r, i, q, m, l, s);
    rep.pentagon = std::max(rep.pentagon, std::abs(lhs - rhs));
  }

  for (int i = 0; i < 2; ++i)
  for (int j = 0; j < 2; ++j)
  for (int m = 0; m < 2; ++m)
  for (int k = 0; k < 2; ++k)
  for (int l = 0; l < 2; ++l)
  for (int n = 0; n < 2; ++n) {
    double x = F(i, j, m, k, l, n);
    rep.physicality = std::max(
        rep.physicality, std::abs(x * D(i, j, m) * D(k, l, m) - x * D(i, l, n) * D(j, k, n)));
    rep.unitarity = std::max(rep.unitarity, std::abs(x - F(l, i, n, j, k, m)));
    double t = std::max({std::abs(x - F(j, i, m, l, k, n)), std::abs(x - F(l, k, m, j, i, n)),
                         std::abs(x - F(i, m, j, k, n, l) * v(m) * v(n) / (v(j) * v(l)))});
    // Symmetries only relate admissible entries; off-support entries must be 0.
    if (!(D(i, j, m) && D(k, l, m) && D(i, l, n) && D(j, k, n))) t = std::abs(x);
    rep.tetrahedral = std::max(rep.tetrahedral, t);
  }

  for (int i = 0; i < 2; ++i)
  for (int j = 0; j < 2; ++j)
  for (int k = 0; k < 2; ++k) {
    double want = v(k) / (v(i) * v(j)) * D(i, j, k);
    rep.normalization = std::max(rep.normalization, std::abs(F(i, i, 0, j, j, k) - want));
  }

  // For fixed (a,b,c,d), F maps f -> e; it must be unitary between the
  // allowed input and output sets.
  for (int a = 0; a < 2; ++a)
  for (int b = 0; b < 2; ++b)
  for (int c = 0; c < 2; ++c)
  for (int d = 0; d < 2; ++d) {
    Eigen::Matrix2d m;
    Eigen::Matrix2cd bm;
    for (int e = 0; e < 2; ++e)
      for (int f = 0; f < 2; ++f) {
        m(e, f) = F(a, b, e, c, d, f);
        bm(e, f) = cat.b(a, b, e, c, d, f);
      }
    std::vector<int> ins, outs;
    for (int f = 0; f < 2; ++f)
      if (D(a, d, f) && D(b, c, f)) ins.push_back(f);
    for (int e = 0; e < 2; ++e)
      if (D(a, b, e) && D(c, d, e)) outs.push_back(e);
    for (int x : ins)
      for (int y : ins) {
        double g = 0;
        for (int e : outs) g += m(e, x) * m(e, y);
        rep.f_block_unitarity = std::max(rep.f_block_unitarity, std::abs(g - (x == y ? 1.0 : 0.0)));
      }
    // B^{abe}_{cdg} maps g -> e; the input vertices are (a,c,g) and (d,b,g).
    std::vector<int> bins;
    for (int g = 0; g < 2; ++g)
      if (D(a, c, g) && D(d, b, g)) bins.push_back(g);
    for (int x : bins)
      for (int y : bins) {
        cplx g = 0;
        for (int e : outs) g += std::conj(bm(e, x)) * bm(e, y);
        rep.b_unitarity = std::max(rep.b_unitarity, std::abs(g - (x == y ? 1.0 : 0.0)));
      }
  }

  BraidRep br = braid_generators(cat);
  Eigen::Matrix2cd yb = br.sigma1 * br.sigma2 * br.sigma1 - br.sigma2 * br.sigma1 * br.sigma2;
  rep.yang_baxter = yb.cwiseAbs().maxCoeff();
  return rep;
}

BraidRep braid_generators(const CategoryData& cat) {
  BraidRep rep;
  rep.sigma1 = Eigen::Matrix2cd::Zero();
  rep.sigma1(0, 0) = cat.r(1, 1, 0);
  rep.sigma1(1, 1) = cat.r(1, 1, 1);
  // Change of fusion basis for the middle pair: entries F^{tt e}_{tt f}.
  Eigen::Matrix2cd u;
  for (int e = 0; e < 2; ++e)
    for (int f = 0; f < 2; ++f) u(e, f) = cat.f(1, 1, e, 1, 1, f);
  rep.sigma2 = u * rep.sigma1 * u;
  return rep;
}

BraidWord parse_braid_word(std::string_view text) {
  BraidWord word;
  auto trim = [](std::string_view s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) return std::string_view{};
    return s.substr(b, s.find_last_not_of(" \t") - b + 1);
  };
  if (trim(text).empty()) return word;
  std::size_t pos = 0;
  while (true) {
    const auto comma = text.find(',', pos);
    const auto token = trim(text.substr(pos, comma == std::string_view::npos ? text.npos : comma - pos));
    if (token == "s1") {
      word.push_back(Generator::s1);
    } else if (token == "s2") {
      word.push_back(Generator::s2);
    } else if (token.empty()) {
      throw std::invalid_argument("empty braid generator in '" + std::string(text) + "'");
    } else {
      throw std::invalid_argument("unknown braid generator '" + std::string(token) + "'");
    }
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return word;
}

std::string format_braid_word(const BraidWord& word) {
  std::string out;
  for (size_t i = 0; i < word.size(); ++i) {
    if (i) out += ',';
    out += word[i] == Generator::s1 ? "s1" : "s2";
  }
  return out;
}

LogicalState apply_braid_word(const BraidWord& word, const LogicalState& init,
                              const BraidRep& rep) {
  Eigen::Vector2cd x(init.c0, init.c1);
  for (auto it = word.rbegin(); it != word.rend(); ++it) {
    x = (*it == Generator::s1 ? rep.sigma1 : rep.sigma2) * x;
  }
  return {x(0), x(1)};
}

FusionProbabilities fusion_probabilities(const LogicalState& state) {
  return {std::norm(state.c0), std::norm(state.c1)};
}

double monodromy_element(const BraidRep& rep) {
  return (rep.sigma2 * rep.sigma2)(0, 0).real();
}

double quantum_dimension_from_monodromy(double m) {
  if (!(m < 0)) throw std::domain_error("monodromy element must be negative");
  return std::sqrt(-1.0 / m);
}

}  // namespace fibstring
