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

#include "fibstring/tee.hpp"

#include <cmath>

#include "gtest/gtest.h"
#include "json.hpp"

#include "fibstring/parallel.hpp"

using namespace fibstring;

namespace {

const double kGolden = (1 + std::sqrt(5.0)) / 2;
const double kDtot = 1 + kGolden * kGolden;

struct TeeFixture {
  LatticeLayout layout = build_layout(Preset::three_plaquette_fig1b);
  StateVector state = tee_state(layout);
};

const TeeFixture& fixture() {
  static const TeeFixture f;
  return f;
}

// Equal up to a global phase.
bool same_ray(const Matrix& a, const Matrix& b) {
  const cplx ov = (a.adjoint() * b).trace() / 2.0;
  return std::abs(std::abs(ov) - 1) < 1e-12;
}

}  // namespace

TEST(Tee, predicted_entropy_formula) {
  const double alpha = -(1 / kDtot) * std::log(1 / kDtot) - (kGolden * kGolden / kDtot) * std::log(kGolden / kDtot);
  EXPECT_NEAR(area_alpha(), alpha, 1e-14);
  EXPECT_NEAR(predicted_entropy(3, 1), 3 * alpha - std::log(kDtot), 1e-14);
  EXPECT_NEAR(predicted_entropy(4, 1), 4 * alpha - std::log(kDtot), 1e-14);
  EXPECT_NEAR(predicted_entropy(4, 2), 4 * alpha - 2 * std::log(kDtot), 1e-14);
}

TEST(Tee, combination_signs) {
  EXPECT_DOUBLE_EQ(combine_stopo({1, 2, 4, 8, 16, 32, 64}), 1 + 2 + 4 - 8 - 16 - 32 + 64);
}

TEST(Tee, state_shape) {
  const auto& f = fixture();
  EXPECT_EQ(f.state.num_qubits(), 18);
  EXPECT_NEAR(f.state.norm(), 1, 1e-12);
}

TEST(Tee, exact_report_is_uniform) {
  const auto& f = fixture();
  const auto rep = exact_report(f.state, f.layout);
  ASSERT_EQ(rep.schemes.size(), 9u);
  // Value of the reshaping oracle in the acceptance suite.
  for (const auto& s : rep.schemes) EXPECT_NEAR(s.stopo, -1.267148573818, 1e-9);
  for (const auto& r : rep.regions) {
    EXPECT_EQ(r.j, 1);
    EXPECT_NEAR(r.residual(), r.n == 3 ? -0.0599811790 : -0.0862356411, 1e-9) << r.n;
  }
  const auto j = nlohmann::json::parse(rep.to_json());
  EXPECT_EQ(j["schemes"].size(), 9u);
  EXPECT_EQ(rep.schemes_csv().substr(0, 35), "orientation,division,stopo,stderr\n0");
}

TEST(Tee, von_neumann_reaches_minus_ln_d) {
  const auto& f = fixture();
  for (const auto& s : tee_partition_schemes(f.layout)) EXPECT_NEAR(stopo_exact_vn(f.state, s), -std::log(kDtot), 1e-9);
}

TEST(Tee, stopo_exact_matches_report) {
  const auto& f = fixture();
  const auto schemes = tee_partition_schemes(f.layout);
  const auto regions = scheme_regions(schemes[4]);
  std::array<double, 7> s{};
  for (int k = 0; k < 7; ++k) s[k] = f.state.renyi2(regions[k]);
  EXPECT_NEAR(combine_stopo(s), stopo_exact(f.state, schemes[4]), 1e-12);
}

TEST(RandomUnitary, clifford_group_closed) {
  const auto& g = clifford_group();
  ASSERT_EQ(g.size(), 24u);
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_LT(unitarity_residual(g[i]), 1e-14);
    for (std::size_t j = 0; j < i; ++j) EXPECT_FALSE(same_ray(g[i], g[j])) << i << " " << j;
  }
  for (const auto& a : g)
    for (const auto& b : g) {
      const Matrix p = a * b;
      bool found = false;
      for (const auto& c : g) found = found || same_ray(p, c);
      EXPECT_TRUE(found);
    }
}

TEST(RandomUnitary, haar_is_unitary_and_uniform) {
  auto rng = rng_stream(21, 0);
  // E|U_00|^2 = 1/2 and E|U_00|^4 = 1/3 under the Haar measure.
  double m2 = 0, m4 = 0;
  const int n = 40000;
  for (int k = 0; k < n; ++k) {
    const auto u = sample_random_unitary(Ensemble::haar, rng);
    ASSERT_LT(unitarity_residual(u), 1e-13);
    const double p = std::norm(u(0, 0));
    m2 += p;
    m4 += p * p;
  }
  EXPECT_NEAR(m2 / n, 0.5, 0.01);
  EXPECT_NEAR(m4 / n, 1.0 / 3, 0.01);
}

TEST(RandomUnitary, clifford_draws_cover_group) {
  auto rng = rng_stream(22, 0);
  const auto& g = clifford_group();
  std::vector<int> hits(24, 0);
  for (int k = 0; k < 2400; ++k) {
    const auto u = sample_random_unitary(Ensemble::clifford, rng);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (same_ray(u, g[i])) ++hits[i];
  }
  for (int h : hits) EXPECT_GT(h, 0);
}

TEST(Rm, config_validation) {
  RMConfig c;
  EXPECT_NO_THROW(c.validate());
  c.instances = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = RMConfig{};
  c.exact = false;
  c.shots = 1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = RMConfig{};
  c.mitigate = true;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  EXPECT_EQ(parse_ensemble("clifford"), Ensemble::clifford);
  EXPECT_THROW(parse_ensemble("gaussian"), std::invalid_argument);
}

TEST(Rm, bell_pair_purity) {
  StateVector sv(2);
  const QubitId a{0, 0}, b{0, 1};
  sv.alloc(a);
  sv.alloc(b);
  Matrix h(2, 2);
  h << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0), 1 / std::sqrt(2.0), -1 / std::sqrt(2.0);
  sv.apply(h, {a});
  Matrix x(2, 2);
  x << 0, 1, 1, 0;
  sv.apply(x, {b}, {{a, 1}});
  RMConfig c;
  c.instances = 4000;
  c.seed = 3;
  const auto est = rm_estimate_purity(sv, {a}, c);
  EXPECT_NEAR(est.purity, 0.5, 4 * est.stderr_ + 1e-3);
  c.exact = false;
  c.shots = 50;
  c.instances = 2000;
  const auto sampled = rm_estimate_purity(sv, {a}, c);
  EXPECT_NEAR(sampled.purity, 0.5, 5 * sampled.stderr_ + 1e-3);
}

TEST(Rm, readout_noise_raises_entropy) {
  StateVector sv(2);
  sv.alloc(QubitId{0, 0});
  sv.alloc(QubitId{0, 1});
  RMConfig c;
  c.instances = 600;
  c.seed = 4;
  const std::vector<QubitId> both{QubitId{0, 0}, QubitId{0, 1}};
  const double clean = rm_estimate_purity(sv, both, c).s2;
  c.noise = ReadoutModel::uniform(0.9, 0.85);
  const double noisy = rm_estimate_purity(sv, both, c).s2;
  EXPECT_GT(noisy, clean + 0.1);
  c.mitigate = true;
  const double mitigated = rm_estimate_purity(sv, both, c).s2;
  EXPECT_LT(std::abs(mitigated - clean), std::abs(noisy - clean));
}

TEST(Rm, deterministic_for_seed) {
  const auto& f = fixture();
  RMConfig c;
  c.instances = 6;
  c.exact = false;
  c.shots = 200;
  c.seed = 8;
  c.bootstrap = 10;
  EXPECT_EQ(rm_stopo(f.state, f.layout, c).to_json(), rm_stopo(f.state, f.layout, c).to_json());
}
