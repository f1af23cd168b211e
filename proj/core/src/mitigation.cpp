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
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fibstring/parallel.hpp"
#include "json.hpp"

namespace fibstring {

ReadoutModel ReadoutModel::identity() { return uniform(1.0, 1.0); }

ReadoutModel ReadoutModel::uniform(double f0, double f1) {
  ReadoutModel m;
  m.default_fidelity = {f0, f1};
  return m;
}

namespace {

Fidelity checked(double f0, double f1) {
  if (!(f0 > 0.5 && f0 <= 1.0 && f1 > 0.5 && f1 <= 1.0))
    throw std::invalid_argument("readout fidelities must lie in (0.5, 1]");
  return {f0, f1};
}

Fidelity fid_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument("fidelity entry must be [f0, f1]");
  return checked(j[0].get<double>(), j[1].get<double>());
}

}  // namespace

ReadoutModel ReadoutModel::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("readout model: ") + e.what());
  }
  if (!j.contains("schema_version") || j["schema_version"] != 1)
    throw std::invalid_argument("readout model: schema_version 1 required");
  ReadoutModel m;
  if (j.contains("default")) m.default_fidelity = fid_from_json(j["default"]);
  if (j.contains("qubits")) {
    for (auto it = j["qubits"].begin(); it != j["qubits"].end(); ++it)
      m.set(QubitId::parse(it.key()), fid_from_json(it.value()));
  }
  return m;
}

ReadoutModel ReadoutModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open readout model " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

std::string ReadoutModel::to_json() const {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["default"] = {default_fidelity.f0, default_fidelity.f1};
  j["qubits"] = nlohmann::json::object();
  for (const auto& [q, f] : per_qubit) j["qubits"][q.str()] = {f.f0, f.f1};
  return j.dump(2);
}

void ReadoutModel::set(const QubitId& q, Fidelity f) { per_qubit[q] = checked(f.f0, f.f1); }

Fidelity ReadoutModel::fidelity(const QubitId& q) const {
  auto it = per_qubit.find(q);
  return it == per_qubit.end() ? default_fidelity : it->second;
}

bool ReadoutModel::is_identity() const {
  auto one = [](const Fidelity& f) { return f.f0 == 1.0 && f.f1 == 1.0; };
  if (!one(default_fidelity)) return false;
  for (const auto& [_, f] : per_qubit)
    if (!one(f)) return false;
  return true;
}

ResponseMatrix ReadoutModel::response(const std::vector<QubitId>& subset) const {
  std::vector<Fidelity> f;
  f.reserve(subset.size());
  for (const auto& q : subset) f.push_back(fidelity(q));
  return ResponseMatrix(std::move(f));
}

ResponseMatrix::ResponseMatrix(std::vector<Fidelity> per_position) : fid_(std::move(per_position)) {
  for (const auto& f : fid_) checked(f.f0, f.f1);
}

std::vector<double> ResponseMatrix::sweep(const std::vector<double>& x, bool transpose) const {
  if (x.size() != dim()) throw std::invalid_argument("response matrix dimension mismatch");
  std::vector<double> y = x;
  for (int k = 0; k < num_qubits(); ++k) {
    const double f0 = fid_[k].f0, f1 = fid_[k].f1;
    // M = [[f0, 1-f1], [1-f0, f1]]
    double m00 = f0, m01 = 1 - f1, m10 = 1 - f0, m11 = f1;
    if (transpose) std::swap(m01, m10);
    const std::size_t bit = std::size_t{1} << k;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (i & bit) continue;
      double a = y[i], b = y[i | bit];
      y[i] = m00 * a + m01 * b;
      y[i | bit] = m10 * a + m11 * b;
    }
  }
  return y;
}

std::vector<double> ResponseMatrix::apply(const std::vector<double>& x) const { return sweep(x, false); }

std::vector<double> ResponseMatrix::apply_transpose(const std::vector<double>& x) const {
  return sweep(x, true);
}

Eigen::MatrixXd ResponseMatrix::dense() const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Ones(1, 1);
  for (int k = 0; k < num_qubits(); ++k) {
    Eigen::Matrix2d m;
    m << fid_[k].f0, 1 - fid_[k].f1, 1 - fid_[k].f0, fid_[k].f1;
    Eigen::MatrixXd next(out.rows() * 2, out.cols() * 2);
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) next.block(r * out.rows(), c * out.cols(), out.rows(), out.cols()) = m(r, c) * out;
    out = next;
  }
  return out;
}

Distribution Distribution::from_counts(const std::vector<std::uint64_t>& counts) {
  Distribution d;
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  if (total == 0) throw std::invalid_argument("empty counts");
  d.p.resize(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) d.p[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
  d.shots = total;
  return d;
}

Distribution apply_readout_noise(const Distribution& dist, const ResponseMatrix& R) {
  return {R.apply(dist.p), dist.shots};
}

void apply_readout_noise(std::vector<std::uint64_t>& outcomes, const ResponseMatrix& R, std::mt19937_64& rng) {
  const auto& fid = R.fidelities();
  for (auto& w : outcomes) {
    for (std::size_t k = 0; k < fid.size(); ++k) {
      const std::uint64_t bit = std::uint64_t{1} << k;
      double flip = (w & bit) ? 1.0 - fid[k].f1 : 1.0 - fid[k].f0;
      if (flip > 0 && uniform01(rng) < flip) w ^= bit;
    }
  }
}

namespace {

void check_measured(const std::vector<double>& m, const ResponseMatrix& R) {
  if (m.size() != R.dim()) throw std::invalid_argument("distribution and response sizes differ");
  for (double x : m)
    if (x < 0 || !std::isfinite(x)) throw std::invalid_argument("distribution has negative entries");
}

std::vector<double> safe_ratio(const std::vector<double>& m, const std::vector<double>& q) {
  std::vector<double> r(m.size());
  for (std::size_t j = 0; j < m.size(); ++j) {
    if (q[j] <= 0) {
      if (m[j] > 0) throw std::domain_error("IBU: zero denominator");
      r[j] = 0;
    } else {
      r[j] = m[j] / q[j];
    }
  }
  return r;
}

// Iterates c^0 .. c^T and returns them all (needed by the reverse pass).
std::vector<std::vector<double>> ibu_trajectory(const std::vector<double>& m, const ResponseMatrix& R,
                                                int iterations) {
  if (iterations < 1) throw std::invalid_argument("IBU needs at least one iteration");
  check_measured(m, R);
  std::vector<std::vector<double>> cs;
  cs.reserve(iterations + 1);
  cs.emplace_back(m.size(), 1.0 / static_cast<double>(m.size()));
  for (int it = 0; it < iterations; ++it) {
    const auto& c = cs.back();
    auto g = R.apply_transpose(safe_ratio(m, R.apply(c)));
    std::vector<double> next(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) next[i] = c[i] * g[i];
    cs.push_back(std::move(next));
  }
  return cs;
}

}  // namespace

Distribution ibu(const Distribution& measured, const ResponseMatrix& R, int iterations) {
  auto cs = ibu_trajectory(measured.p, R, iterations);
  return {cs.back(), measured.shots};
}

std::vector<double> ibu_jvp(const std::vector<double>& m, const ResponseMatrix& R, int iterations,
                            const std::vector<double>& dm) {
  if (iterations < 1) throw std::invalid_argument("IBU needs at least one iteration");
  check_measured(m, R);
  if (dm.size() != m.size()) throw std::invalid_argument("direction size mismatch");
  const std::size_t N = m.size();
  std::vector<double> c(N, 1.0 / static_cast<double>(N)), dc(N, 0.0);
  for (int it = 0; it < iterations; ++it) {
    auto q = R.apply(c);
    auto dq = R.apply(dc);
    std::vector<double> r(N), dr(N);
    for (std::size_t j = 0; j < N; ++j) {
      if (q[j] <= 0) {
        if (m[j] > 0 || dm[j] != 0) throw std::domain_error("IBU: zero denominator");
        r[j] = dr[j] = 0;
        continue;
      }
      r[j] = m[j] / q[j];
      dr[j] = dm[j] / q[j] - m[j] * dq[j] / (q[j] * q[j]);
    }
    auto g = R.apply_transpose(r);
    auto dg = R.apply_transpose(dr);
    for (std::size_t i = 0; i < N; ++i) {
      dc[i] = dc[i] * g[i] + c[i] * dg[i];
      c[i] *= g[i];
    }
  }
  return dc;
}

std::vector<double> ibu_vjp(const std::vector<double>& m, const ResponseMatrix& R, int iterations,
                            const std::vector<double>& u) {
  auto cs = ibu_trajectory(m, R, iterations);
  const std::size_t N = m.size();
  if (u.size() != N) throw std::invalid_argument("cotangent size mismatch");
  std::vector<double> cbar = u, mbar(N, 0.0);
  for (int it = iterations - 1; it >= 0; --it) {
    const auto& c = cs[it];
    auto q = R.apply(c);
    auto g = R.apply_transpose(safe_ratio(m, q));
    std::vector<double> gbar(N), next(N);
    for (std::size_t i = 0; i < N; ++i) {
      gbar[i] = cbar[i] * c[i];
      next[i] = cbar[i] * g[i];
    }
    auto rbar = R.apply(gbar);
    std::vector<double> qbar(N, 0.0);
    for (std::size_t j = 0; j < N; ++j) {
      if (q[j] <= 0) continue;
      mbar[j] += rbar[j] / q[j];
      qbar[j] = -rbar[j] * m[j] / (q[j] * q[j]);
    }
    auto back = R.apply_transpose(qbar);
    for (std::size_t i = 0; i < N; ++i) next[i] += back[i];
    cbar = std::move(next);
  }
  return mbar;
}

Eigen::MatrixXd ibu_jacobian(const std::vector<double>& m, const ResponseMatrix& R, int iterations) {
  const std::size_t N = m.size();
  Eigen::MatrixXd J(N, N);
  std::vector<double> e(N, 0.0);
  for (std::size_t k = 0; k < N; ++k) {
    e[k] = 1.0;
    auto col = ibu_jvp(m, R, iterations, e);
    for (std::size_t i = 0; i < N; ++i) J(i, k) = col[i];
    e[k] = 0.0;
  }
  return J;
}

Eigen::MatrixXd covariance(const std::vector<double>& X, std::uint64_t shots) {
  if (shots < 2) throw std::invalid_argument("covariance needs at least two shots");
  const std::size_t N = X.size();
  const double denom = static_cast<double>(shots - 1);
  Eigen::MatrixXd C(N, N);
  for (std::size_t k = 0; k < N; ++k)
    for (std::size_t l = 0; l < N; ++l)
      C(k, l) = (k == l ? X[k] - X[k] * X[k] : -X[k] * X[l]) / denom;
  return C;
}

double mitigated_product(const Distribution& measured, const ResponseMatrix& R, std::size_t i, std::size_t j,
                         std::uint64_t shots, int iterations) {
  const std::size_t N = measured.p.size();
  if (i >= N || j >= N) throw std::out_of_range("outcome index out of range");
  if (shots < 2) throw std::invalid_argument("mitigated product needs at least two shots");
  auto f = ibu(measured, R, iterations).p;
  std::vector<double> ei(N, 0.0), ej(N, 0.0);
  ei[i] = 1.0;
  ej[j] = 1.0;
  auto Ji = ibu_vjp(measured.p, R, iterations, ei);
  auto Jj = i == j ? Ji : ibu_vjp(measured.p, R, iterations, ej);
  // Ji C Jj^T with C = (diag(X) - X X^T) / (N - 1).
  const auto& X = measured.p;
  double diag = 0, a = 0, b = 0;
  for (std::size_t k = 0; k < N; ++k) {
    diag += Ji[k] * Jj[k] * X[k];
    a += Ji[k] * X[k];
    b += Jj[k] * X[k];
  }
  double corr = (diag - a * b) / static_cast<double>(shots - 1);
  return f[i] * f[j] - corr;
}

double naive_product(const Distribution& measured, const ResponseMatrix& R, std::size_t i, std::size_t j,
                     int iterations) {
  auto f = ibu(measured, R, iterations).p;
  if (i >= f.size() || j >= f.size()) throw std::out_of_range("outcome index out of range");
  return f[i] * f[j];
}

double kernel_quadratic(const std::vector<double>& x, const Kernel1q& k1, int n_qubits) {
  if (x.size() != (std::size_t{1} << n_qubits)) throw std::invalid_argument("kernel size mismatch");
  std::vector<double> y = x;
  for (int k = 0; k < n_qubits; ++k) {
    const std::size_t bit = std::size_t{1} << k;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (i & bit) continue;
      double a = y[i], b = y[i | bit];
      y[i] = k1[0] * a + k1[1] * b;
      y[i | bit] = k1[2] * a + k1[3] * b;
    }
  }
  CompensatedSum s;
  for (std::size_t i = 0; i < x.size(); ++i) s.add(x[i] * y[i]);
  return s.value();
}

double mitigated_kernel_quadratic(const Distribution& measured, const ResponseMatrix& R, const Kernel1q& k1,
                                  int iterations) {
  if (measured.shots < 2) throw std::invalid_argument("mitigated estimator needs at least two shots");
  const auto& X = measured.p;
  const std::size_t N = X.size();
  const int n = R.num_qubits();
  auto f = ibu(measured, R, iterations).p;
  double main = kernel_quadratic(f, k1, n);
  // tr(K J C J^T) = [sum_k X_k (J e_k)^T K (J e_k) - (J X)^T K (J X)] / (N - 1)
  CompensatedSum diag;
  std::vector<double> e(N, 0.0);
  for (std::size_t k = 0; k < N; ++k) {
    if (X[k] <= 0) continue;
    e[k] = 1.0;
    auto col = ibu_jvp(X, R, iterations, e);
    e[k] = 0.0;
    diag.add(X[k] * kernel_quadratic(col, k1, n));
  }
  auto jx = ibu_jvp(X, R, iterations, X);
  double corr = (diag.value() - kernel_quadratic(jx, k1, n)) / static_cast<double>(measured.shots - 1);
  return main - corr;
}

}  // namespace fibstring
