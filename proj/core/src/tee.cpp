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

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "fibstring/parallel.hpp"
#include "fibstring/stringnet.hpp"

namespace fibstring {
namespace {

constexpr Kernel1q kRmKernel{2.0, -1.0, -1.0, 2.0};
constexpr std::uint64_t kBootstrapStream = 0xb0075eedULL;

double s2_from_purity(double purity) { return purity > 0 ? -std::log(purity) : std::nan(""); }

// Gathers chosen bits of a parent index into a compact index, one lookup per
// byte of the parent.
class Gather {
 public:
  explicit Gather(const std::vector<int>& bit_of_child) {
    int top = 0;
    for (int b : bit_of_child) top = std::max(top, b + 1);
    tables_.assign(static_cast<std::size_t>((top + 7) / 8), std::array<std::uint32_t, 256>{});
    for (std::size_t t = 0; t < tables_.size(); ++t)
      for (std::uint32_t v = 0; v < 256; ++v) {
        std::uint32_t out = 0;
        for (std::size_t k = 0; k < bit_of_child.size(); ++k) {
          const int b = bit_of_child[k] - static_cast<int>(8 * t);
          if (b >= 0 && b < 8 && ((v >> b) & 1)) out |= 1u << k;
        }
        tables_[t][v] = out;
      }
  }
  std::uint32_t operator()(std::uint64_t x) const {
    std::uint32_t out = 0;
    for (std::size_t t = 0; t < tables_.size(); ++t) out |= tables_[t][(x >> (8 * t)) & 0xff];
    return out;
  }

 private:
  std::vector<std::array<std::uint32_t, 256>> tables_;
};

// Marginalization plan: every subset is summed out of its smallest already
// available superset (the full region is node -1).
struct MarginalPlan {
  struct Node {
    std::vector<int> bits;  // positions within the region
    int parent = -1;
    Gather gather{{}};
  };
  std::vector<Node> nodes;
  std::vector<int> order;  // parents before children
};

MarginalPlan make_plan(const std::vector<std::vector<int>>& subsets) {
  MarginalPlan plan;
  plan.order.resize(subsets.size());
  std::iota(plan.order.begin(), plan.order.end(), 0);
  std::stable_sort(plan.order.begin(), plan.order.end(),
                   [&](int a, int b) { return subsets[a].size() > subsets[b].size(); });
  plan.nodes.resize(subsets.size());
  std::vector<int> done;
  for (int s : plan.order) {
    auto& node = plan.nodes[s];
    node.bits = subsets[s];
    int best = -1;
    for (int d : done) {
      const auto& pb = subsets[d];
      const bool contains = std::all_of(node.bits.begin(), node.bits.end(), [&](int b) {
        return std::find(pb.begin(), pb.end(), b) != pb.end();
      });
      if (contains && (best < 0 || pb.size() < subsets[best].size())) best = d;
    }
    node.parent = best;
    std::vector<int> local;
    for (int b : node.bits) {
      if (best < 0) {
        local.push_back(b);
      } else {
        const auto& pb = subsets[best];
        local.push_back(static_cast<int>(std::find(pb.begin(), pb.end(), b) - pb.begin()));
      }
    }
    node.gather = Gather(local);
    done.push_back(s);
  }
  return plan;
}

std::vector<std::vector<double>> marginals(const MarginalPlan& plan, const std::vector<double>& full) {
  std::vector<std::vector<double>> out(plan.nodes.size());
  for (int s : plan.order) {
    const auto& node = plan.nodes[s];
    const auto& src = node.parent < 0 ? full : out[node.parent];
    std::vector<double> m(std::size_t{1} << node.bits.size(), 0.0);
    for (std::size_t x = 0; x < src.size(); ++x)
      if (src[x] != 0) m[node.gather(x)] += src[x];
    out[s] = std::move(m);
  }
  return out;
}

// Per-instance estimate of Tr rho^2 from one marginal.
double instance_value(const std::vector<double>& marg, int n, const RMConfig& cfg, const ResponseMatrix* R) {
  if (cfg.exact) {
    if (R && cfg.mitigate) {
      const auto f = ibu(Distribution{marg, 0}, *R, cfg.ibu_iterations);
      return kernel_quadratic(f.p, kRmKernel, n);
    }
    return kernel_quadratic(marg, kRmKernel, n);
  }
  const double N = static_cast<double>(cfg.shots);
  if (R && cfg.mitigate) {
    std::vector<double> freq(marg.size());
    for (std::size_t k = 0; k < marg.size(); ++k) freq[k] = marg[k] / N;
    return mitigated_kernel_quadratic(Distribution{freq, cfg.shots}, *R, kRmKernel, cfg.ibu_iterations);
  }
  // Pairs of distinct shots: drop the diagonal K_ww = 2^n.
  const double q = kernel_quadratic(marg, kRmKernel, n);
  return (q - std::ldexp(1.0, n) * N) / (N * (N - 1));
}

// values[i][s]: per-instance estimate for subset s. Subsets are bit positions
// within `region`; unitaries act on every region qubit.
std::vector<std::vector<double>> rm_dataset(const StateVector& sv, const std::vector<QubitId>& region,
                                            const std::vector<std::vector<int>>& subsets, const RMConfig& cfg) {
  cfg.validate();
  const auto plan = make_plan(subsets);
  std::vector<std::optional<ResponseMatrix>> resp(subsets.size());
  std::optional<ResponseMatrix> full_resp;
  if (cfg.noise) {
    full_resp = cfg.noise->response(region);
    for (std::size_t s = 0; s < subsets.size(); ++s) {
      std::vector<QubitId> qs;
      for (int b : subsets[s]) qs.push_back(region[b]);
      resp[s] = cfg.noise->response(qs);
    }
  }
  std::vector<std::vector<double>> values(static_cast<std::size_t>(cfg.instances));
  parallel_for(values.size(), [&](std::size_t i) {
    auto rng = rng_stream(cfg.seed, i);
    StateVector local = sv;
    for (const auto& q : region) {
      const QubitId t[] = {q};
      local.apply(sample_random_unitary(cfg.ensemble, rng), t);
    }
    std::vector<double> full;
    if (cfg.exact) {
      full = local.probabilities(region);
      if (full_resp) full = apply_readout_noise(Distribution{full, 0}, *full_resp).p;
    } else {
      const Counts c = local.sample(region, cfg.shots, rng, cfg.noise ? &*cfg.noise : nullptr);
      full.assign(c.counts.begin(), c.counts.end());
    }
    const auto m = marginals(plan, full);
    std::vector<double> row(subsets.size());
    for (std::size_t s = 0; s < subsets.size(); ++s)
      row[s] = instance_value(m[s], static_cast<int>(subsets[s].size()), cfg, resp[s] ? &*resp[s] : nullptr);
    values[i] = std::move(row);
  });
  return values;
}

std::vector<double> column_means(const std::vector<std::vector<double>>& v, const std::vector<std::size_t>& idx) {
  const std::size_t m = v.empty() ? 0 : v[0].size();
  std::vector<double> out(m);
  for (std::size_t s = 0; s < m; ++s) {
    CompensatedSum acc;
    for (std::size_t i : idx) acc.add(v[i][s]);
    out[s] = acc.value() / static_cast<double>(idx.size());
  }
  return out;
}

double sample_std(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0;
  CompensatedSum s;
  for (double x : xs) s.add(x);
  const double mean = s.value() / static_cast<double>(xs.size());
  CompensatedSum q;
  for (double x : xs) q.add((x - mean) * (x - mean));
  return std::sqrt(q.value() / static_cast<double>(xs.size() - 1));
}

struct RegionIndex {
  std::vector<std::vector<QubitId>> regions;
  std::vector<SchemeEstimate> schemes;
};

RegionIndex index_regions(const std::vector<PartitionScheme>& schemes) {
  RegionIndex idx;
  std::map<std::vector<QubitId>, int> seen;
  for (const auto& s : schemes) {
    SchemeEstimate e;
    e.orientation = s.orientation;
    e.division = s.division;
    const auto regs = scheme_regions(s);
    for (int r = 0; r < 7; ++r) {
      auto [it, fresh] = seen.emplace(regs[r], static_cast<int>(idx.regions.size()));
      if (fresh) idx.regions.push_back(regs[r]);
      e.region[r] = it->second;
    }
    idx.schemes.push_back(e);
  }
  return idx;
}

EntropyReport assemble(const LatticeLayout& layout, const RegionIndex& idx, const std::vector<double>& s2,
                       const std::vector<double>& s2_err, const std::vector<double>& stopo_err,
                       double mean_err, std::string mode) {
  EntropyReport rep;
  rep.mode = std::move(mode);
  for (std::size_t r = 0; r < idx.regions.size(); ++r) {
    RegionEntropy e;
    e.qubits = idx.regions[r];
    const auto g = region_geometry(layout, e.qubits);
    e.n = g.n;
    e.j = g.j;
    e.s2 = s2[r];
    e.stderr_ = s2_err.empty() ? 0 : s2_err[r];
    e.predicted = predicted_entropy(g.n, g.j);
    if (!std::isfinite(e.s2)) rep.flags.push_back("purity estimate out of range in region " + std::to_string(r));
    rep.regions.push_back(std::move(e));
  }
  CompensatedSum acc;
  for (std::size_t k = 0; k < idx.schemes.size(); ++k) {
    SchemeEstimate e = idx.schemes[k];
    std::array<double, 7> v{};
    for (int r = 0; r < 7; ++r) v[r] = s2[e.region[r]];
    e.stopo = combine_stopo(v);
    e.stderr_ = stopo_err.empty() ? 0 : stopo_err[k];
    acc.add(e.stopo);
    rep.schemes.push_back(e);
  }
  rep.mean = acc.value() / static_cast<double>(rep.schemes.size());
  rep.mean_stderr = mean_err;
  return rep;
}

std::string join_qubits(const std::vector<QubitId>& qs, const char* sep) {
  std::string out;
  for (std::size_t k = 0; k < qs.size(); ++k) {
    if (k) out += sep;
    out += qs[k].str();
  }
  return out;
}

}  // namespace

Ensemble parse_ensemble(std::string_view name) {
  if (name == "haar") return Ensemble::haar;
  if (name == "clifford") return Ensemble::clifford;
  throw std::invalid_argument("unknown ensemble '" + std::string(name) + "' (haar|clifford)");
}

std::string to_string(Ensemble e) { return e == Ensemble::haar ? "haar" : "clifford"; }

void RMConfig::validate() const {
  if (instances < 1) throw std::invalid_argument("instances must be >= 1");
  if (!exact && shots < 2) throw std::invalid_argument("sampled mode needs shots >= 2");
  if (ibu_iterations < 1) throw std::invalid_argument("ibu iterations must be >= 1");
  if (bootstrap < 0) throw std::invalid_argument("bootstrap count must be >= 0");
  if (mitigate && !noise) throw std::invalid_argument("mitigation needs a readout model");
}

void copy_boundary(StateVector& sv, const std::vector<CopyPair>& map) {
  for (const auto& c : map) {
    if (!sv.contains(c.target)) {
      sv.alloc(c.target);
    } else {
      const QubitId t[] = {c.target};
      if (sv.probabilities(t)[1] > 1e-12) throw EngineError("copy target " + c.target.str() + " is not in |0>");
    }
    const QubitId t[] = {c.target};
    const Control ctl[] = {{c.source, 1}};
    sv.apply(x_gate(), t, ctl);
  }
}

StateVector tee_state(const LatticeLayout& layout, const CategoryData& cat) {
  const auto map = boundary_copy_map(layout);
  StateVector sv(static_cast<int>(layout.edges.size()) + static_cast<int>(map.size()));
  prepare_ground_state(sv, layout, cat);
  for (const auto& q : layout.leg_edges()) sv.free(q);
  copy_boundary(sv, map);
  return sv;
}

std::array<std::vector<QubitId>, 7> scheme_regions(const PartitionScheme& s) {
  auto join = [](std::vector<QubitId> a, const std::vector<QubitId>& b) {
    a.insert(a.end(), b.begin(), b.end());
    std::sort(a.begin(), a.end());
    return a;
  };
  auto sorted = [](std::vector<QubitId> a) {
    std::sort(a.begin(), a.end());
    return a;
  };
  return {sorted(s.A), sorted(s.B), sorted(s.C), join(s.A, s.B), join(s.B, s.C), join(s.A, s.C),
          join(join(s.A, s.B), s.C)};
}

double combine_stopo(const std::array<double, 7>& s) {
  return s[0] + s[1] + s[2] - s[3] - s[4] - s[5] + s[6];
}

double stopo_exact(const StateVector& sv, const PartitionScheme& scheme) {
  std::array<double, 7> v{};
  const auto regs = scheme_regions(scheme);
  for (int r = 0; r < 7; ++r) v[r] = sv.renyi2(regs[r]);
  return combine_stopo(v);
}

double stopo_exact_vn(const StateVector& sv, const PartitionScheme& scheme) {
  std::array<double, 7> v{};
  const auto regs = scheme_regions(scheme);
  for (int r = 0; r < 7; ++r) v[r] = sv.von_neumann(regs[r]);
  return combine_stopo(v);
}

double area_alpha() {
  const double D = CategoryData::total_dimension_squared();
  double a = 0;
  for (int k = 0; k < 2; ++k) {
    const double d = CategoryData::qdim(k);
    a -= d * d / D * std::log(d / D);
  }
  return a;
}

double predicted_entropy(int n, int j) {
  if (n < 0 || j < 1) throw std::invalid_argument("predicted_entropy needs n >= 0 and j >= 1");
  return -j * std::log(CategoryData::total_dimension_squared()) + n * area_alpha();
}

EntropyReport exact_report(const StateVector& sv, const LatticeLayout& layout) {
  const auto idx = index_regions(tee_partition_schemes(layout));
  std::vector<double> s2;
  for (const auto& r : idx.regions) s2.push_back(sv.renyi2(r));
  return assemble(layout, idx, s2, {}, {}, 0, "exact");
}

std::string EntropyReport::to_json() const {
  using nlohmann::json;
  json j;
  j["mode"] = mode;
  json regs = json::array();
  for (const auto& r : regions) {
    json q = json::array();
    for (const auto& x : r.qubits) q.push_back(x.str());
    regs.push_back({{"qubits", q}, {"n", r.n}, {"j", r.j}, {"s2", r.s2}, {"stderr", r.stderr_},
                    {"predicted", r.predicted}, {"residual", r.residual()}});
  }
  j["regions"] = regs;
  json sch = json::array();
  for (const auto& s : schemes)
    sch.push_back({{"orientation", s.orientation}, {"division", s.division}, {"regions", s.region},
                   {"stopo", s.stopo}, {"stderr", s.stderr_}});
  j["schemes"] = sch;
  j["mean"] = mean;
  j["mean_stderr"] = mean_stderr;
  j["flags"] = flags;
  return j.dump(2);
}

std::string EntropyReport::regions_csv() const {
  std::ostringstream os;
  os.precision(12);
  os << "region,qubits,n,j,s2,stderr,predicted,residual\n";
  for (std::size_t r = 0; r < regions.size(); ++r) {
    const auto& e = regions[r];
    os << r << ',' << join_qubits(e.qubits, " ") << ',' << e.n << ',' << e.j << ',' << e.s2 << ',' << e.stderr_
       << ',' << e.predicted << ',' << e.residual() << '\n';
  }
  return os.str();
}

std::string EntropyReport::schemes_csv() const {
  std::ostringstream os;
  os.precision(12);
  os << "orientation,division,stopo,stderr\n";
  for (const auto& s : schemes) os << s.orientation << ',' << s.division << ',' << s.stopo << ',' << s.stderr_ << '\n';
  return os.str();
}

const std::vector<Matrix>& clifford_group() {
  static const std::vector<Matrix> group = [] {
    const double r = 1.0 / std::sqrt(2.0);
    Matrix h(2, 2), s(2, 2);
    h << r, r, r, -r;
    s << 1, 0, 0, cplx(0, 1);
    auto canonical = [](Matrix m) {
      for (Eigen::Index k = 0; k < 4; ++k) {
        const cplx v = m.data()[k];
        if (std::abs(v) > 1e-9) {
          m *= std::abs(v) / v;
          break;
        }
      }
      return m;
    };
    std::vector<Matrix> out{Matrix::Identity(2, 2)};
    auto known = [&](const Matrix& m) {
      return std::any_of(out.begin(), out.end(), [&](const Matrix& x) { return (x - m).cwiseAbs().maxCoeff() < 1e-9; });
    };
    for (std::size_t k = 0; k < out.size(); ++k) {
      for (const Matrix* g : {&h, &s}) {
        Matrix m = canonical(*g * out[k]);
        if (!known(m)) out.push_back(m);
      }
    }
    return out;
  }();
  return group;
}

Matrix sample_random_unitary(Ensemble ensemble, std::mt19937_64& rng) {
  if (ensemble == Ensemble::clifford) {
    const auto& g = clifford_group();
    return g[static_cast<std::size_t>(uniform01(rng) * static_cast<double>(g.size()))];
  }
  const double theta = std::asin(std::sqrt(uniform01(rng)));
  const double psi = 2 * kPi * uniform01(rng);
  const double chi = 2 * kPi * uniform01(rng);
  const double alpha = 2 * kPi * uniform01(rng);
  const cplx ph = std::polar(1.0, alpha);
  Matrix u(2, 2);
  u << ph * std::polar(std::cos(theta), psi), ph * std::polar(std::sin(theta), chi),
      -ph * std::polar(std::sin(theta), -chi), ph * std::polar(std::cos(theta), -psi);
  return u;
}

PurityEstimate rm_estimate_purity(const StateVector& sv, const std::vector<QubitId>& subset, const RMConfig& cfg) {
  if (subset.empty()) throw std::invalid_argument("empty subset");
  std::vector<int> all(subset.size());
  std::iota(all.begin(), all.end(), 0);
  const auto values = rm_dataset(sv, subset, {all}, cfg);
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  PurityEstimate est;
  est.purity = column_means(values, idx)[0];
  est.s2 = s2_from_purity(est.purity);
  std::vector<double> boot;
  auto rng = rng_stream(cfg.seed ^ kBootstrapStream, 0);
  for (int b = 0; b < cfg.bootstrap; ++b) {
    for (auto& i : idx) i = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(values.size()));
    boot.push_back(s2_from_purity(column_means(values, idx)[0]));
  }
  est.stderr_ = sample_std(boot);
  return est;
}

EntropyReport rm_stopo(const StateVector& sv, const LatticeLayout& layout, const RMConfig& cfg) {
  const auto region = tee_region(layout);
  const auto idx = index_regions(tee_partition_schemes(layout));
  std::vector<std::vector<int>> subsets;
  for (const auto& r : idx.regions) {
    std::vector<int> bits;
    for (const auto& q : r) {
      auto it = std::find(region.begin(), region.end(), q);
      if (it == region.end()) throw std::invalid_argument(q.str() + " is outside the TEE region");
      bits.push_back(static_cast<int>(it - region.begin()));
    }
    subsets.push_back(std::move(bits));
  }
  const auto values = rm_dataset(sv, region, subsets, cfg);
  std::vector<std::size_t> all(values.size());
  std::iota(all.begin(), all.end(), 0);
  std::vector<double> s2;
  for (double p : column_means(values, all)) s2.push_back(s2_from_purity(p));

  // Bootstrap over instances; every statistic shares the resample.
  std::vector<std::vector<double>> boot_s2(s2.size()), boot_st(idx.schemes.size());
  std::vector<double> boot_mean;
  auto rng = rng_stream(cfg.seed ^ kBootstrapStream, 0);
  std::vector<std::size_t> pick(values.size());
  for (int b = 0; b < cfg.bootstrap; ++b) {
    for (auto& i : pick) i = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(values.size()));
    const auto m = column_means(values, pick);
    std::vector<double> s(m.size());
    for (std::size_t r = 0; r < m.size(); ++r) boot_s2[r].push_back(s[r] = s2_from_purity(m[r]));
    double acc = 0;
    for (std::size_t k = 0; k < idx.schemes.size(); ++k) {
      std::array<double, 7> v{};
      for (int r = 0; r < 7; ++r) v[r] = s[idx.schemes[k].region[r]];
      const double st = combine_stopo(v);
      boot_st[k].push_back(st);
      acc += st;
    }
    boot_mean.push_back(acc / static_cast<double>(idx.schemes.size()));
  }
  std::vector<double> s2_err, st_err;
  for (const auto& b : boot_s2) s2_err.push_back(sample_std(b));
  for (const auto& b : boot_st) st_err.push_back(sample_std(b));
  std::string mode = "rm-" + to_string(cfg.ensemble) + (cfg.exact ? "-exact" : "-sampled");
  if (cfg.noise) mode += cfg.mitigate ? "-mitigated" : "-noisy";
  return assemble(layout, idx, s2, s2_err, st_err, sample_std(boot_mean), mode);
}

std::array<EnsembleComparison, 2> compare_ensembles(const StateVector& sv, const std::vector<QubitId>& subset,
                                                    int instances, int repetitions, std::uint64_t seed) {
  if (repetitions < 2) throw std::invalid_argument("need at least two repetitions");
  const double exact = sv.renyi2(subset);
  std::array<EnsembleComparison, 2> out;
  const Ensemble ens[] = {Ensemble::haar, Ensemble::clifford};
  for (int e = 0; e < 2; ++e) {
    auto& c = out[e];
    c.ensemble = ens[e];
    c.exact = exact;
    for (int r = 0; r < repetitions; ++r) {
      RMConfig cfg;
      cfg.ensemble = ens[e];
      cfg.instances = instances;
      cfg.exact = true;
      cfg.bootstrap = 0;
      cfg.seed = seed + static_cast<std::uint64_t>(r);
      c.estimates.push_back(rm_estimate_purity(sv, subset, cfg).s2);
    }
    CompensatedSum err;
    for (double x : c.estimates) err.add(std::abs(x - exact));
    c.mean_abs_error = err.value() / repetitions;
    const double sd = sample_std(c.estimates);
    c.variance = sd * sd;
  }
  return out;
}

}  // namespace fibstring
