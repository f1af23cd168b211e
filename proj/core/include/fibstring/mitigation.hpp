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
#include <map>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fibstring/qubit.hpp"

namespace fibstring {

/// Readout fidelities: f0 = P(read 0 | 0), f1 = P(read 1 | 1).
struct Fidelity {
  double f0 = 0.97;
  double f1 = 0.93;
};

class ResponseMatrix;

/// Per-qubit confusion matrices [[f0, 1-f1], [1-f0, f1]] (column = true
/// outcome). The 0.97 / 0.93 default is synthetic.
class ReadoutModel {
 public:
  ReadoutModel() = default;
  static ReadoutModel identity();
  static ReadoutModel uniform(double f0, double f1);

  /// {"schema_version": 1, "default": [f0, f1], "qubits": {"Q(5,9)": [f0, f1]}}
  static ReadoutModel from_json(const std::string& text);
  static ReadoutModel load(const std::string& path);
  std::string to_json() const;

  void set(const QubitId& q, Fidelity f);
  Fidelity fidelity(const QubitId& q) const;
  bool is_identity() const;
  ResponseMatrix response(const std::vector<QubitId>& subset) const;

  Fidelity default_fidelity{};
  std::map<QubitId, Fidelity> per_qubit;
};

/// Tensor product of per-qubit confusion matrices; position k acts on bit k of
/// the outcome index. Never materialized except through dense() for tests.
class ResponseMatrix {
 public:
  explicit ResponseMatrix(std::vector<Fidelity> per_position);

  int num_qubits() const { return static_cast<int>(fid_.size()); }
  std::size_t dim() const { return std::size_t{1} << fid_.size(); }
  const std::vector<Fidelity>& fidelities() const { return fid_; }

  std::vector<double> apply(const std::vector<double>& x) const;
  std::vector<double> apply_transpose(const std::vector<double>& x) const;
  Eigen::MatrixXd dense() const;

 private:
  std::vector<double> sweep(const std::vector<double>& x, bool transpose) const;
  std::vector<Fidelity> fid_;
};

struct Distribution {
  std::vector<double> p;
  /// Number of shots the frequencies came from; 0 for exact distributions.
  std::uint64_t shots = 0;

  static Distribution from_counts(const std::vector<std::uint64_t>& counts);
};

Distribution apply_readout_noise(const Distribution& dist, const ResponseMatrix& R);

/// Sample mode: flips the bits of each outcome independently with the
/// model's conditional probabilities.
void apply_readout_noise(std::vector<std::uint64_t>& outcomes, const ResponseMatrix& R,
                         std::mt19937_64& rng);

/// Iterative Bayesian unfolding from the uniform distribution,
/// c <- c * R^T (m / (R c)). Throws std::domain_error on a zero denominator.
Distribution ibu(const Distribution& measured, const ResponseMatrix& R, int iterations = 50);

/// Directional derivative of the IBU map at m along dm (forward recurrence).
std::vector<double> ibu_jvp(const std::vector<double>& m, const ResponseMatrix& R, int iterations,
                            const std::vector<double>& dm);
/// J^T u for the IBU map at m (reverse recurrence).
std::vector<double> ibu_vjp(const std::vector<double>& m, const ResponseMatrix& R, int iterations,
                            const std::vector<double>& u);
/// Full Jacobian d c_i / d m_k, built column by column.
Eigen::MatrixXd ibu_jacobian(const std::vector<double>& m, const ResponseMatrix& R, int iterations = 50);

/// Unbiased multinomial covariance of the frequencies X from N shots.
Eigen::MatrixXd covariance(const std::vector<double>& freqs, std::uint64_t shots);

/// f_i f_j - sum_kl J_ik C_kl J_jl with f = ibu(measured).
double mitigated_product(const Distribution& measured, const ResponseMatrix& R, std::size_t i,
                         std::size_t j, std::uint64_t shots, int iterations = 50);
/// f_i f_j without the covariance correction.
double naive_product(const Distribution& measured, const ResponseMatrix& R, std::size_t i,
                     std::size_t j, int iterations = 50);

/// Per-qubit 2x2 kernel (row-major) whose tensor power K weights outcome pairs.
using Kernel1q = std::array<double, 4>;

/// sum_{w,w'} K_{ww'} x_w x_{w'} via per-qubit sweeps.
double kernel_quadratic(const std::vector<double>& x, const Kernel1q& k1, int n_qubits);

/// sum_{w,w'} K_{ww'} [f_w f_{w'} - (J C J^T)_{ww'}] with f = ibu(measured):
/// the covariance-corrected quadratic form. Costs one JVP per observed outcome.
double mitigated_kernel_quadratic(const Distribution& measured, const ResponseMatrix& R,
                                  const Kernel1q& k1, int iterations = 50);

}  // namespace fibstring
