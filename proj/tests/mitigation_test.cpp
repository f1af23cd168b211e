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

#include "fibstring/mitigation.hpp"

#include <cmath>

#include "gtest/gtest.h"

#include "fibstring/parallel.hpp"

using namespace fibstring;

namespace {

Eigen::MatrixXd kron_response(const std::vector<Fidelity>& f) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(1, 1);
  for (const auto& x : f) {
    Eigen::Matrix2d c;
    c << x.f0, 1 - x.f1, 1 - x.f0, x.f1;
    Eigen::MatrixXd k(m.rows() * 2, m.cols() * 2);
    for (int r = 0; r < 2; ++r)
      for (int s = 0; s < 2; ++s) k.block(r * m.rows(), s * m.cols(), m.rows(), m.cols()) = c(r, s) * m;
    m = k;
  }
  return m;
}

std::vector<double> random_distribution(std::size_t n, std::mt19937_64& rng) {
  std::vector<double> p(n);
  double z = 0;
  for (auto& x : p) z += (x = 0.05 + uniform01(rng));
  for (auto& x : p) x /= z;
  return p;
}

}  // namespace

TEST(Response, matches_kronecker_product) {
  auto rng = rng_stream(31, 0);
  for (int n = 1; n <= 4; ++n) {
    std::vector<Fidelity> f;
    for (int k = 0; k < n; ++k) f.push_back({0.8 + 0.2 * uniform01(rng), 0.8 + 0.2 * uniform01(rng)});
    const ResponseMatrix R(f);
    const Eigen::MatrixXd K = kron_response(f);
    const auto x = random_distribution(R.dim(), rng);
    const auto y = R.apply(x), yt = R.apply_transpose(x);
    const Eigen::VectorXd xv = Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
    const Eigen::VectorXd ky = K * xv, kyt = K.transpose() * xv;
    for (std::size_t i = 0; i < x.size(); ++i) {
      EXPECT_NEAR(y[i], ky(i), 1e-12);
      EXPECT_NEAR(yt[i], kyt(i), 1e-12);
    }
    EXPECT_LT((R.dense() - K).cwiseAbs().maxCoeff(), 1e-15);
    for (Eigen::Index c = 0; c < K.cols(); ++c) EXPECT_NEAR(K.col(c).sum(), 1, 1e-12);
  }
}

TEST(Noise, single_qubit_example) {
  const ResponseMatrix R({{0.9, 0.8}});
  const auto d = apply_readout_noise(Distribution{{1, 0}, 0}, R);
  EXPECT_NEAR(d.p[0], 0.9, 1e-15);
  EXPECT_NEAR(d.p[1], 0.1, 1e-15);
  const ResponseMatrix I({{1, 1}});
  EXPECT_EQ(apply_readout_noise(Distribution{{0.3, 0.7}, 0}, I).p, (std::vector<double>{0.3, 0.7}));
}

TEST(Noise, sample_mode_flip_rates) {
  const ResponseMatrix R({{0.9, 0.8}});
  auto rng = rng_stream(32, 0);
  std::vector<std::uint64_t> outcomes(100000, 0);
  for (std::size_t k = outcomes.size() / 2; k < outcomes.size(); ++k) outcomes[k] = 1;
  apply_readout_noise(outcomes, R, rng);
  std::uint64_t ones_low = 0, ones_high = 0;
  for (std::size_t k = 0; k < outcomes.size(); ++k) (k < outcomes.size() / 2 ? ones_low : ones_high) += outcomes[k];
  EXPECT_NEAR(ones_low / 50000.0, 0.1, 0.01);
  EXPECT_NEAR(ones_high / 50000.0, 0.8, 0.01);
}

TEST(Ibu, identity_is_a_fixed_point) {
  const ResponseMatrix I({{1, 1}, {1, 1}});
  const Distribution m{{0.1, 0.2, 0.3, 0.4}, 0};
  const auto out = ibu(m, I, 1);
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(out.p[k], m.p[k], 1e-15);
}

TEST(Ibu, single_qubit_converges_to_inverse_image) {
  const ResponseMatrix R({{0.9, 0.8}});
  const auto out = ibu(Distribution{{0.9, 0.1}, 0}, R, 2000);
  EXPECT_NEAR(out.p[0], 1, 1e-3);
  const auto short_run = ibu(Distribution{{0.9, 0.1}, 0}, R, 50);
  EXPECT_GT(short_run.p[0], 0.9);
}

TEST(Ibu, symmetric_noise_keeps_uniform) {
  const ResponseMatrix R({{0.9, 0.9}, {0.95, 0.95}});
  const auto out = ibu(Distribution{{0.25, 0.25, 0.25, 0.25}, 0}, R);
  for (double x : out.p) EXPECT_NEAR(x, 0.25, 1e-14);
}

TEST(Ibu, preserves_normalization_and_sign) {
  auto rng = rng_stream(33, 0);
  const ResponseMatrix R({{0.97, 0.93}, {0.95, 0.9}, {0.99, 0.94}});
  const auto m = random_distribution(8, rng);
  for (int it : {1, 5, 50}) {
    const auto out = ibu(Distribution{m, 0}, R, it);
    double s = 0;
    for (double x : out.p) {
      EXPECT_GE(x, 0);
      s += x;
    }
    EXPECT_NEAR(s, 1, 1e-12);
  }
  EXPECT_THROW(ibu(Distribution{m, 0}, R, 0), std::invalid_argument);
}

TEST(Ibu, recovers_truth_small_models) {
  auto rng = rng_stream(34, 0);
  for (int n = 1; n <= 2; ++n) {
    std::vector<Fidelity> f(n, Fidelity{0.97, 0.93});
    const ResponseMatrix R(f);
    const auto t = random_distribution(R.dim(), rng);
    const auto out = ibu(apply_readout_noise(Distribution{t, 0}, R), R, 50);
    double tv = 0;
    for (std::size_t k = 0; k < t.size(); ++k) tv += std::abs(out.p[k] - t[k]) / 2;
    EXPECT_LT(tv, 1e-6) << n;
  }
}

TEST(Jacobian, matches_finite_differences) {
  auto rng = rng_stream(35, 0);
  const ResponseMatrix R({{0.96, 0.91}, {0.93, 0.9}});
  const auto m = random_distribution(4, rng);
  const auto J = ibu_jacobian(m, R, 50);
  const double h = 1e-5;
  for (int c = 0; c < 4; ++c) {
    auto up = m, dn = m;
    up[c] += h;
    dn[c] -= h;
    const auto fu = ibu(Distribution{up, 0}, R, 50).p, fd = ibu(Distribution{dn, 0}, R, 50).p;
    for (int r = 0; r < 4; ++r) {
      const double num = (fu[r] - fd[r]) / (2 * h);
      EXPECT_NEAR(J(r, c), num, 1e-6 * std::max(1.0, std::abs(num)));
    }
  }
}

TEST(Jacobian, jvp_and_vjp_agree) {
  auto rng = rng_stream(36, 0);
  const ResponseMatrix R({{0.96, 0.91}, {0.93, 0.9}, {0.99, 0.95}});
  const auto m = random_distribution(8, rng);
  const auto u = random_distribution(8, rng), v = random_distribution(8, rng);
  const auto jv = ibu_jvp(m, R, 30, v);
  const auto jtu = ibu_vjp(m, R, 30, u);
  double a = 0, b = 0;
  for (int k = 0; k < 8; ++k) {
    a += u[k] * jv[k];
    b += jtu[k] * v[k];
  }
  EXPECT_NEAR(a, b, 1e-12);
}

TEST(Covariance, examples) {
  const auto c = covariance({0.5, 0.5}, 2);
  EXPECT_NEAR(c(0, 0), 0.25, 1e-15);
  EXPECT_NEAR(c(0, 1), -0.25, 1e-15);
  const auto det = covariance({1, 0, 0}, 10);
  EXPECT_NEAR(det(0, 0), 0, 1e-15);
  const auto g = covariance({0.2, 0.3, 0.5}, 40);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(g.row(k).sum(), 0, 1e-15);
  EXPECT_LT((g - g.transpose()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(g).eigenvalues().minCoeff(), -1e-15);
  EXPECT_THROW(covariance({1.0}, 1), std::invalid_argument);
}

TEST(Product, identity_response_is_unbiased_estimator) {
  const ResponseMatrix I({{1, 1}});
  const Distribution d{{0.3, 0.7}, 10};
  EXPECT_NEAR(mitigated_product(d, I, 0, 0, 10), 0.09 - 0.3 * 0.7 / 9, 1e-12);
  EXPECT_NEAR(mitigated_product(d, I, 0, 1, 10), 0.21 + 0.21 / 9, 1e-12);
  EXPECT_NEAR(naive_product(d, I, 0, 1), 0.21, 1e-12);
}

TEST(Product, kernel_quadratic_matches_dense) {
  auto rng = rng_stream(37, 0);
  const Kernel1q k{2, -1, -1, 2};
  for (int n = 1; n <= 3; ++n) {
    const auto x = random_distribution(std::size_t{1} << n, rng);
    double dense = 0;
    for (std::size_t a = 0; a < x.size(); ++a)
      for (std::size_t b = 0; b < x.size(); ++b) {
        double w = 1;
        for (int q = 0; q < n; ++q) w *= k[((a >> q) & 1) * 2 + ((b >> q) & 1)];
        dense += w * x[a] * x[b];
      }
    EXPECT_NEAR(kernel_quadratic(x, k, n), dense, 1e-13);
  }
}

TEST(Product, mitigated_quadratic_reduces_bias) {
  const ResponseMatrix R({{0.97, 0.93}, {0.95, 0.9}});
  const std::vector<double> t = {0.5, 0.1, 0.3, 0.1};
  const auto m = apply_readout_noise(Distribution{t, 0}, R);
  const Kernel1q k{2, -1, -1, 2};
  const double truth = kernel_quadratic(t, k, 2);
  const std::uint64_t shots = 30;
  const int reps = 4000;
  double naive = 0, corrected = 0;
  for (int r = 0; r < reps; ++r) {
    auto rng = rng_stream(38, r);
    std::discrete_distribution<std::size_t> pick(m.p.begin(), m.p.end());
    std::vector<std::uint64_t> counts(4, 0);
    for (std::uint64_t s = 0; s < shots; ++s) ++counts[pick(rng)];
    const auto d = Distribution::from_counts(counts);
    naive += kernel_quadratic(ibu(d, R).p, k, 2);
    corrected += mitigated_kernel_quadratic(d, R, k);
  }
  EXPECT_LT(std::abs(corrected / reps - truth), std::abs(naive / reps - truth));
}

TEST(Model, json_round_trip) {
  auto m = ReadoutModel::uniform(0.95, 0.9);
  m.set(QubitId{5, 9}, {0.99, 0.98});
  const auto back = ReadoutModel::from_json(m.to_json());
  EXPECT_NEAR(back.fidelity(QubitId{5, 9}).f1, 0.98, 1e-15);
  EXPECT_NEAR(back.fidelity(QubitId{1, 1}).f0, 0.95, 1e-15);
  EXPECT_TRUE(ReadoutModel::identity().is_identity());
  EXPECT_THROW(ReadoutModel::from_json(R"({"default": [0.9, 0.9]})"), std::invalid_argument);
  EXPECT_THROW(m.set(QubitId{0, 0}, {1.2, 0.9}), std::invalid_argument);
}
