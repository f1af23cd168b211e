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

// Acceptance suite. Each criterion prints one line per check and a final
// verdict line; `--criterion N` runs a single criterion (one ctest entry each).

#include <sys/resource.h>

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fibstring/category.hpp"
#include "fibstring/engine.hpp"
#include "fibstring/lattice.hpp"
#include "fibstring/mitigation.hpp"
#include "fibstring/parallel.hpp"
#include "fibstring/stringnet.hpp"
#include "fibstring/tee.hpp"

using namespace fibstring;

namespace {

using Clock = std::chrono::steady_clock;
using cd = std::complex<double>;

const double kGolden = (1 + std::sqrt(5.0)) / 2;
const double kPiRef = std::acos(-1.0);

struct Verdict {
  int failures = 0;

  void check(bool ok, const std::string& what) {
    std::printf("  %s  %s\n", ok ? "pass" : "FAIL", what.c_str());
    if (!ok) ++failures;
  }
  void check_below(double value, double bound, const std::string& what) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s = %.3e < %.0e", what.c_str(), value, bound);
    check(std::isfinite(value) && value < bound, buf);
  }
  void check_near(double value, double target, double tol, const std::string& what) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s = %.9f (target %.9f +- %.0e)", what.c_str(), value, target, tol);
    check(std::isfinite(value) && std::abs(value - target) <= tol, buf);
  }
  void note(const std::string& what) { std::printf("  info  %s\n", what.c_str()); }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double peak_rss_gib() {
  rusage u{};
  getrusage(RUSAGE_SELF, &u);
  return static_cast<double>(u.ru_maxrss) / (1024.0 * 1024.0);
}

std::string fmt(const char* f, double x) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

// Test-side braid representation from the Fibonacci data: sigma1 = R,
// sigma2 = F R F.
struct OracleBraids {
  Eigen::Matrix2cd s1, s2;
  OracleBraids() {
    Eigen::Matrix2cd f;
    f << 1 / kGolden, 1 / std::sqrt(kGolden), 1 / std::sqrt(kGolden), -1 / kGolden;
    s1 = Eigen::Matrix2cd::Zero();
    s1(0, 0) = std::polar(1.0, -4 * kPiRef / 5);
    s1(1, 1) = std::polar(1.0, 3 * kPiRef / 5);
    s2 = f * s1 * f;
  }
  double p_vac(const BraidWord& w) const {
    Eigen::Vector2cd v(1, 0);
    for (auto it = w.rbegin(); it != w.rend(); ++it) v = (*it == Generator::s1 ? s1 : s2) * v;
    return std::norm(v(0));
  }
};

LatticeLayout three() { return build_layout(Preset::three_plaquette_fig1b); }

// ------------------------------------------------------------------------ 1

void criterion_1(Verdict& v) {
  const auto t0 = Clock::now();
  const auto rep = verify_category();
  const OracleBraids o;
  const double yb = (o.s1 * o.s2 * o.s1 - o.s2 * o.s1 * o.s2).cwiseAbs().maxCoeff();
  const auto gens = braid_generators();
  const double yb_lib = (gens.sigma1 * gens.sigma2 * gens.sigma1 - gens.sigma2 * gens.sigma1 * gens.sigma2).norm();
  const double dt = seconds_since(t0);
  v.check_below(rep.pentagon, 1e-12, "pentagon residual");
  v.check_below(rep.unitarity, 1e-12, "unitarity residual");
  v.check_below(rep.tetrahedral, 1e-12, "tetrahedral residual");
  v.check_below(rep.normalization, 1e-12, "normalization residual");
  v.check_below(rep.physicality, 1e-12, "physicality residual");
  v.check_below(yb_lib, 1e-12, "||s1 s2 s1 - s2 s1 s2|| (library generators)");
  v.check_below(yb, 1e-12, "||s1 s2 s1 - s2 s1 s2|| (independent generators)");
  v.check_below((gens.sigma2 - o.s2).cwiseAbs().maxCoeff(), 1e-12, "library s2 vs independent F R F");
  v.check_below(dt, 1.0, "runtime [s]");
}

// ------------------------------------------------------------------------ 2

void criterion_2(Verdict& v) {
  const auto L = three();
  const auto t0 = Clock::now();
  StateVector sv(28);
  prepare_ground_state(sv, L);
  double qv = 0, bp = 0;
  for (double q : measure_qv_all(sv, L)) qv = std::max(qv, std::abs(q - 1));
  for (int p = 0; p < static_cast<int>(L.plaquettes.size()); ++p) bp = std::max(bp, std::abs(measure_bp(sv, L, p) - 1));
  const StateVector oracle = ground_state_oracle(L);
  const double infid = 1 - std::norm(oracle.inner(sv));
  const double dt = seconds_since(t0);
  v.check(sv.num_qubits() == 22, "register holds the 22 edge qubits (" + std::to_string(sv.num_qubits()) + ")");
  v.check_below(qv, 1e-10, "max |<Q_v> - 1|");
  v.check_below(bp, 1e-10, "max |<B_p> - 1|");
  v.check_below(infid, 1e-9, "1 - |<oracle|psi>|^2");
  v.check_below(dt, 300, "runtime [s]");
  v.check_below(peak_rss_gib(), 4, "peak RSS [GiB]");
}

// ------------------------------------------------------------------------ 3

void criterion_3(Verdict& v) {
  const auto t0 = Clock::now();
  const auto op = build_bp_generic();
  double idem = 0;
  for (const auto& b : op.blocks) idem = std::max(idem, (b * b - b).cwiseAbs().maxCoeff());
  const auto terms = pauli_decompose(op);
  const auto groups = group_bases(terms);
  const auto rebuilt = reconstruct_blocks(terms, op);
  double recon = 0;
  for (std::size_t k = 0; k < op.blocks.size(); ++k)
    recon = std::max(recon, (rebuilt[k] - op.blocks[k]).cwiseAbs().maxCoeff());
  // Every term must be diagonal in its group's basis.
  bool compatible = true;
  for (std::size_t t = 0; t < terms.terms.size(); ++t) {
    const auto& w = terms.terms[t].word;
    const auto& b = groups.bases[groups.assignment[t]];
    for (std::size_t k = 0; k < w.size(); ++k)
      if (w[k] != 'I' && w[k] != b[k]) compatible = false;
  }
  const double dt = seconds_since(t0);
  v.check_below(idem, 1e-12, "max |B_p^2 - B_p|");
  v.check(terms.terms.size() == 99328, "nonzero Pauli terms = " + std::to_string(terms.terms.size()) + " (expect 99328)");
  v.check(terms.n_qubits == 12, "word length = " + std::to_string(terms.n_qubits) + " (expect 12)");
  v.check(groups.bases.size() == 290, "measurement bases = " + std::to_string(groups.bases.size()) + " (expect 290)");
  v.check(compatible, "every term is measured by a qubit-wise compatible basis");
  v.check_below(recon, 1e-10, "max reconstruction error");
  v.check_below(dt, 120, "runtime [s]");
}

// ------------------------------------------------------------------------ 4

void criterion_4(Verdict& v) {
  const auto L = three();
  const auto t0 = Clock::now();
  StateVector gs(28);
  prepare_ground_state(gs, L);
  const OracleBraids o;
  const std::vector<std::pair<std::string, double>> cases = {
      {"", 1.0}, {"s2", 0.381966}, {"s1,s2", 0.381966}, {"s2,s1,s2", 0.381966}, {"s2,s2", 0.145898}};
  double m_tt = std::nan("");
  for (const auto& [text, expected] : cases) {
    BraidExperiment e;
    e.word = parse_braid_word(text);
    const auto r = run_braiding_experiment(gs, L, e);
    const std::string tag = "word '" + text + "'";
    v.check_below(std::abs(r.p_vac() - r.oracle_vac), 1e-8, tag + " |P_circuit(vac) - P_oracle(vac)|");
    v.check_below(std::abs(r.p_vac() - o.p_vac(e.word)), 1e-8, tag + " |P_circuit(vac) - P_test_oracle(vac)|");
    v.check_near(r.p_vac(), expected, 5e-7, tag + " P(vac)");
    v.check_below(r.discordance(), 1e-9, tag + " discordance");
    if (text == "s2,s2") m_tt = -std::sqrt(r.p[0][0]);
  }
  v.check_near(m_tt, -0.381966, 1e-6, "M_tautau");
  v.check_near(quantum_dimension_from_monodromy(m_tt), 1.618034, 1e-5, "d_tau");
  v.check_near(1 / std::sqrt(-m_tt), 1.618034, 1e-5, "d_tau from (-M)^(-1/2)");
  v.check_below(seconds_since(t0), 600, "runtime [s]");
}

// ------------------------------------------------------------------------ 5

void criterion_5(Verdict& v) {
  const auto L = three();
  StateVector gs(28);
  prepare_ground_state(gs, L);
  for (int p = 0; p < 3; ++p)
    v.check_near(closed_string_expectation(gs, L, p, {}), 1, 1e-10, "ground <O_" + L.plaquettes[p].name + ">");
  int side = -1;
  for (int p = 0; p < 3; ++p) {
    const auto& in = L.plaquettes[p].inner;
    if (std::count(in.begin(), in.end(), L.tails[0].host) && std::count(in.begin(), in.end(), L.tails[1].host)) side = p;
  }
  StateVector sv = gs;
  std::vector<AnyonPair> pairs{create_pair(sv, L, L.tails[0], side)};
  v.check_near(closed_string_expectation(sv, L, side, pairs), 1, 1e-10,
               "pair with both tails in " + L.plaquettes[side].name + ": <O>");
  flip_tail(sv, pairs[0], 0);
  const double inside = closed_string_expectation(sv, L, side, pairs);
  v.check_near(inside, 0, 1e-9, "one tau tail in " + L.plaquettes[side].name + ": <O>");
  std::vector<double> others;
  for (int p = 0; p < 3; ++p)
    if (p != side) others.push_back(closed_string_expectation(sv, L, p, pairs));
  std::sort(others.begin(), others.end());
  v.check_near(others[0], 0, 1e-9, "receiving plaquette <O>");
  v.check_near(others[1], 1, 1e-10, "untouched plaquette <O>");
  flip_tail(sv, pairs[0], 0);
  v.check_near(closed_string_expectation(sv, L, side, pairs), 1, 1e-10, "tail flipped back: <O>");
}

// ------------------------------------------------------------------------ 6

// Second-Renyi entropy from the amplitudes, by reshaping into (region x rest).
double oracle_s2(const StateVector& sv, const std::vector<QubitId>& region) {
  const auto& reg = sv.register_order();
  const int n = static_cast<int>(reg.size());
  std::vector<int> in, out;
  for (int k = 0; k < n; ++k)
    (std::find(region.begin(), region.end(), reg[k]) != region.end() ? in : out).push_back(k);
  Eigen::MatrixXcd psi = Eigen::MatrixXcd::Zero(Eigen::Index{1} << in.size(), Eigen::Index{1} << out.size());
  const auto& amp = sv.amplitudes();
  for (std::size_t i = 0; i < amp.size(); ++i) {
    std::size_t r = 0, c = 0;
    for (std::size_t k = 0; k < in.size(); ++k) r |= ((i >> in[k]) & 1) << k;
    for (std::size_t k = 0; k < out.size(); ++k) c |= ((i >> out[k]) & 1) << k;
    psi(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = amp[i];
  }
  const Eigen::MatrixXcd rho = in.size() <= out.size() ? Eigen::MatrixXcd(psi * psi.adjoint())
                                                       : Eigen::MatrixXcd(psi.adjoint() * psi);
  return -std::log(rho.squaredNorm());
}

void criterion_6(Verdict& v) {
  const auto L = three();
  const auto sv = tee_state(L);
  const auto rep = exact_report(sv, L);
  double lo = 1e9, hi = -1e9;
  for (const auto& s : rep.schemes) {
    lo = std::min(lo, s.stopo);
    hi = std::max(hi, s.stopo);
  }
  v.check(rep.schemes.size() == 9, "nine schemes");
  v.check_below(hi - lo, 1e-9, "spread of the nine S_topo");
  std::map<std::pair<int, int>, std::pair<double, double>> cls;
  for (const auto& r : rep.regions) {
    auto [it, fresh] = cls.try_emplace({r.n, r.j}, r.residual(), r.residual());
    it->second.first = std::min(it->second.first, r.residual());
    it->second.second = std::max(it->second.second, r.residual());
  }
  for (const auto& [k, mm] : cls)
    v.check_below(mm.second - mm.first, 1e-9,
                  "spread of S2 - predicted in class (n=" + std::to_string(k.first) + ", j=" + std::to_string(k.second) + ")");
  const double D = 1 + kGolden * kGolden;
  const double alpha = -(1 / D) * std::log(1 / D) - (kGolden * kGolden / D) * std::log(kGolden / D);
  v.check_near(area_alpha(), 0.9377, 1e-4, "area coefficient alpha");
  v.check_near(area_alpha(), alpha, 1e-12, "alpha vs test-side formula");
  double worst = 0;
  const auto schemes = tee_partition_schemes(L);
  for (std::size_t k = 0; k < schemes.size(); ++k) {
    const auto regions = scheme_regions(schemes[k]);
    std::array<double, 7> s{};
    for (int r = 0; r < 7; ++r) s[r] = oracle_s2(sv, regions[r]);
    const double direct = s[0] + s[1] + s[2] - s[3] - s[4] - s[5] + s[6];
    worst = std::max(worst, std::abs(direct - rep.schemes[k].stopo));
  }
  v.check_below(worst, 1e-9, "max |S_topo - brute-force reshaping oracle|");
  const double vn = stopo_exact_vn(sv, schemes[0]);
  v.note("S_topo (second Renyi) = " + fmt("%.9f", rep.mean) + ", -ln(1+phi^2) = " + fmt("%.9f", -std::log(D)) +
         (std::abs(rep.mean + std::log(D)) < 1e-6 ? ": equal" : ": not equal"));
  v.note("S_topo (von Neumann) = " + fmt("%.9f", vn) + (std::abs(vn + std::log(D)) < 1e-9 ? ": equals -ln D" : ""));
}

// ------------------------------------------------------------------------ 7

void criterion_7(Verdict& v) {
  const auto L = three();
  const auto t0 = Clock::now();
  const auto sv = tee_state(L);
  const auto subset = scheme_regions(tee_partition_schemes(L)[0])[6];
  v.check(subset.size() == 11, "subsystem has " + std::to_string(subset.size()) + " qubits");
  RMConfig cfg;
  cfg.ensemble = Ensemble::haar;
  cfg.instances = 1500;
  cfg.exact = true;
  cfg.seed = 20260;
  const auto est = rm_estimate_purity(sv, subset, cfg);
  const double exact = sv.renyi2(subset);
  const double dev = std::abs(est.s2 - exact);
  v.note("RM S2 = " + fmt("%.6f", est.s2) + " +- " + fmt("%.6f", est.stderr_) + ", exact " + fmt("%.6f", exact));
  v.check_below(dev, 0.1, "|S2_RM - S2_exact|");
  v.check_below(dev / est.stderr_, 3, "|S2_RM - S2_exact| / bootstrap stderr");
  const auto cmp = compare_ensembles(sv, subset, 100, 40, 777);
  const auto& haar = cmp[0];
  const auto& cliff = cmp[1];
  v.check(haar.ensemble == Ensemble::haar && cliff.ensemble == Ensemble::clifford, "comparison order haar, clifford");
  v.check(haar.mean_abs_error < cliff.mean_abs_error,
          "mean |error|: haar " + fmt("%.4f", haar.mean_abs_error) + " < clifford " + fmt("%.4f", cliff.mean_abs_error));
  v.check(haar.variance < cliff.variance,
          "variance: haar " + fmt("%.5f", haar.variance) + " < clifford " + fmt("%.5f", cliff.variance));
  v.check_below(seconds_since(t0), 1800, "runtime [s]");
}

// ------------------------------------------------------------------------ 8

void criterion_8(Verdict& v) {
  // IBU on exact noisy distributions.
  double worst = 0, worst_long = 0;
  for (int n = 1; n <= 6; ++n) {
    for (int trial = 0; trial < 10; ++trial) {
      auto rng = rng_stream(8008, static_cast<std::uint64_t>(n * 100 + trial));
      std::vector<Fidelity> f;
      for (int k = 0; k < n; ++k) f.push_back({0.9 + 0.09 * uniform01(rng), 0.9 + 0.09 * uniform01(rng)});
      const ResponseMatrix R(f);
      std::vector<double> t(std::size_t{1} << n);
      double z = 0;
      for (auto& x : t) z += (x = -std::log(uniform01(rng)));
      for (auto& x : t) x /= z;
      const auto m = apply_readout_noise(Distribution{t, 0}, R);
      auto tv = [&](const Distribution& d) {
        double s = 0;
        for (std::size_t k = 0; k < t.size(); ++k) s += std::abs(d.p[k] - t[k]);
        return s / 2;
      };
      worst = std::max(worst, tv(ibu(m, R, 50)));
      worst_long = std::max(worst_long, tv(ibu(m, R, 5000)));
    }
  }
  v.check_below(worst, 1e-6, "max TV(IBU_50(R t), t), <= 6 qubits");
  v.note("same cases with 5000 iterations: max TV " + fmt("%.3e", worst_long));

  // Jacobian against central differences.
  {
    auto rng = rng_stream(8009, 0);
    const ResponseMatrix R({{0.96, 0.92}, {0.94, 0.9}, {0.97, 0.93}});
    std::vector<double> m(8);
    double z = 0;
    for (auto& x : m) z += (x = 0.2 + uniform01(rng));
    for (auto& x : m) x /= z;
    const Eigen::MatrixXd J = ibu_jacobian(m, R, 50);
    Eigen::MatrixXd fd(8, 8);
    const double h = 1e-5;
    for (int c = 0; c < 8; ++c) {
      auto up = m, dn = m;
      up[c] += h;
      dn[c] -= h;
      // Unnormalized inputs: the map is evaluated as-is.
      const auto fu = ibu(Distribution{up, 0}, R, 50).p;
      const auto fdn = ibu(Distribution{dn, 0}, R, 50).p;
      for (int r = 0; r < 8; ++r) fd(r, c) = (fu[r] - fdn[r]) / (2 * h);
    }
    double rel = 0;
    for (int r = 0; r < 8; ++r)
      for (int c = 0; c < 8; ++c) rel = std::max(rel, std::abs(J(r, c) - fd(r, c)) / std::max(1e-3, std::abs(fd(r, c))));
    v.check_below(rel, 1e-6, "max relative |J - J_fd|");
  }

  // Naive vs covariance-corrected product over 10^4 repetitions.
  {
    const ResponseMatrix R({{0.97, 0.93}, {0.97, 0.93}});
    const std::vector<double> t = {0.55, 0.2, 0.15, 0.1};
    const auto m = apply_readout_noise(Distribution{t, 0}, R);
    const std::uint64_t shots = 50;
    const int reps = 10000;
    std::vector<double> naive(reps), corrected(reps);
    parallel_for(reps, [&](std::size_t r) {
      auto rng = rng_stream(8010, r);
      std::discrete_distribution<std::size_t> pick(m.p.begin(), m.p.end());
      std::vector<std::uint64_t> counts(4, 0);
      for (std::uint64_t s = 0; s < shots; ++s) ++counts[pick(rng)];
      const auto d = Distribution::from_counts(counts);
      double a = 0, b = 0;
      for (std::size_t i = 0; i < 4; ++i) {
        a += naive_product(d, R, i, i);
        b += mitigated_product(d, R, i, i, shots);
      }
      naive[r] = a;
      corrected[r] = b;
    });
    double truth = 0;
    for (double x : t) truth += x * x;
    const double bn = std::abs(compensated_sum(naive) / reps - truth);
    const double bc = std::abs(compensated_sum(corrected) / reps - truth);
    v.check(bc < bn, "|bias| of sum_i f_i^2: corrected " + fmt("%.3e", bc) + " < naive " + fmt("%.3e", bn));
  }
}

// ------------------------------------------------------------------------ 9

Eigen::MatrixXcd random_unitary(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd a(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) a(r, c) = cd(g(rng), g(rng));
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(a);
  return qr.householderQ();
}

// Full 2^n matrix of a controlled gate, built from index arithmetic.
Eigen::MatrixXcd full_matrix(const Eigen::MatrixXcd& u, const std::vector<int>& tg,
                             const std::vector<std::pair<int, int>>& ctl, int n) {
  const std::size_t dim = std::size_t{1} << n;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  std::size_t tmask = 0;
  for (int t : tg) tmask |= std::size_t{1} << t;
  for (std::size_t j = 0; j < dim; ++j) {
    bool on = true;
    for (auto [q, val] : ctl) on = on && static_cast<int>((j >> q) & 1) == val;
    if (!on) {
      m(j, j) = 1;
      continue;
    }
    std::size_t sj = 0;
    for (std::size_t k = 0; k < tg.size(); ++k) sj |= ((j >> tg[k]) & 1) << k;
    for (std::size_t si = 0; si < (std::size_t{1} << tg.size()); ++si) {
      std::size_t i = j & ~tmask;
      for (std::size_t k = 0; k < tg.size(); ++k) i |= ((si >> k) & 1) << tg[k];
      m(i, j) = u(si, sj);
    }
  }
  return m;
}

void criterion_9(Verdict& v) {
  // Random circuits against dense products.
  double worst = 0;
  for (int trial = 0; trial < 60; ++trial) {
    auto rng = rng_stream(9009, trial);
    const int n = 1 + trial % 6;
    StateVector sv(n);
    for (int k = 0; k < n; ++k) sv.alloc(QubitId{0, k});
    Eigen::VectorXcd ref = Eigen::VectorXcd::Zero(Eigen::Index{1} << n);
    ref(0) = 1;
    for (int g = 0; g < 25; ++g) {
      std::vector<int> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      const int k = 1 + static_cast<int>(rng() % std::min(3, n));
      const int c = static_cast<int>(rng() % (n - k + 1));
      std::vector<int> tg(perm.begin(), perm.begin() + k);
      std::vector<std::pair<int, int>> ctl;
      std::vector<QubitId> tq;
      std::vector<Control> cq;
      for (int t : tg) tq.push_back(QubitId{0, t});
      for (int j = 0; j < c; ++j) {
        const int val = static_cast<int>(rng() & 1);
        ctl.emplace_back(perm[k + j], val);
        cq.push_back({QubitId{0, perm[k + j]}, val});
      }
      const auto u = random_unitary(1 << k, rng);
      sv.apply(u, tq, cq);
      ref = full_matrix(u, tg, ctl, n) * ref;
    }
    for (Eigen::Index i = 0; i < ref.size(); ++i)
      worst = std::max(worst, std::abs(sv.amplitudes()[static_cast<std::size_t>(i)] - ref(i)));
  }
  v.check_below(worst, 1e-12, "max amplitude error vs dense products, <= 6 qubits");

  // Same seed, different worker counts.
  {
    const auto L = three();
    const auto tee = tee_state(L);
    RMConfig cfg;
    cfg.instances = 24;
    cfg.shots = 500;
    cfg.exact = false;
    cfg.seed = 99;
    cfg.bootstrap = 20;
    std::vector<std::string> runs;
    for (int workers : {1, 3, 8}) {
      set_worker_count(workers);
      runs.push_back(rm_stopo(tee, L, cfg).to_json());
    }
    set_worker_count(0);
    v.check(runs[0] == runs[1] && runs[1] == runs[2], "rm_stopo output identical for 1, 3 and 8 workers");
    StateVector a = tee, b = tee;
    a.reseed(5);
    b.reseed(5);
    const auto qs = tee_region(L);
    v.check(a.sample(qs, 2000).counts == b.sample(qs, 2000).counts, "identical seeds give identical samples");
  }

  // 27-qubit allocation and the preparation pipeline.
  {
    const auto L = three();
    const auto t0 = Clock::now();
    StateVector sv(27);
    prepare_ground_state(sv, L);
    double bp = 0;
    for (int p = 0; p < 3; ++p) bp = std::max(bp, std::abs(measure_bp(sv, L, p) - 1));
    std::vector<AnyonPair> pairs;
    int side = -1;
    for (int p = 0; p < 3; ++p) {
      const auto& in = L.plaquettes[p].inner;
      if (std::count(in.begin(), in.end(), L.tails[0].host) && std::count(in.begin(), in.end(), L.tails[1].host)) side = p;
    }
    for (const auto& s : L.tails) pairs.push_back(create_pair(sv, L, s, side));
    for (const auto& q : L.free_ancillas)
      if (!sv.contains(q)) sv.alloc(q);
    const double dt = seconds_since(t0);
    v.check(sv.num_qubits() == 27, "register holds " + std::to_string(sv.num_qubits()) + " qubits (expect 27)");
    v.check_below(std::abs(sv.norm() - 1), 1e-10, "|norm - 1| after the pipeline");
    v.check_below(bp, 1e-10, "max |<B_p> - 1| before the pairs");
    v.check_below(dt, 600, "runtime [s]");
    v.check_below(peak_rss_gib(), 8, "peak RSS [GiB]");
  }
}

const std::map<int, std::pair<const char*, std::function<void(Verdict&)>>> kCriteria = {
    {1, {"category identities", criterion_1}},   {2, {"ground state", criterion_2}},
    {3, {"plaquette operator", criterion_3}},    {4, {"braiding", criterion_4}},
    {5, {"tube algebra", criterion_5}},          {6, {"TEE exact", criterion_6}},
    {7, {"TEE randomized", criterion_7}},        {8, {"mitigation", criterion_8}},
    {9, {"engine", criterion_9}},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      which.push_back(std::atoi(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]...\n", argv[0]);
      return 2;
    }
  }
  if (which.empty())
    for (const auto& [k, _] : kCriteria) which.push_back(k);
  int failed = 0;
  for (int k : which) {
    const auto it = kCriteria.find(k);
    if (it == kCriteria.end()) {
      std::fprintf(stderr, "unknown criterion %d\n", k);
      return 2;
    }
    std::printf("criterion %d: %s\n", k, it->second.first);
    Verdict v;
    const auto t0 = Clock::now();
    try {
      it->second.second(v);
    } catch (const std::exception& e) {
      v.check(false, std::string("exception: ") + e.what());
    }
    std::printf("%s criterion %d (%s) [%.1f s]\n", v.failures ? "FAIL" : "PASS", k, it->second.first,
                seconds_since(t0));
    std::fflush(stdout);
    if (v.failures) ++failed;
  }
  return failed ? 1 : 0;
}
