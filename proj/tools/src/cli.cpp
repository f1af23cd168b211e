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

#include "fibstring_cli/cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"

#include "fibstring/category.hpp"
#include "fibstring/engine.hpp"
#include "fibstring/lattice.hpp"
#include "fibstring/mitigation.hpp"
#include "fibstring/parallel.hpp"
#include "fibstring/stringnet.hpp"
#include "fibstring/tee.hpp"

namespace fibstring::cli {
namespace {

using nlohmann::json;

constexpr double kCheckTol = 1e-10;
constexpr int kSchemaVersion = 1;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string preset = "three_plaquette_fig1b";
  std::optional<std::uint64_t> seed;
  int instances = 1500;
  std::optional<std::uint64_t> shots;
  std::string ensemble = "haar";
  std::string noise;
  std::string out = "out";
  int max_qubits = 28;
  int schema_version = 0;
  std::vector<std::string> words;
  std::string mode = "exact";
  bool mitigate = false;
  std::string corrupt_f;
  int repetitions = 2000;
  int max_size = 4;
};

std::uint64_t require_seed(const Options& o, const char* what) {
  if (!o.seed) throw UsageError(std::string(what) + " needs --seed");
  return *o.seed;
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(12) << x;
  return os.str();
}

json num_or_null(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

// Output files are staged and written only after the command succeeded.
class Outputs {
 public:
  explicit Outputs(std::string dir) : dir_(std::move(dir)) {}
  void add(const std::string& name, std::string content) { files_.emplace_back(name, std::move(content)); }
  void commit() const {
    std::filesystem::create_directories(dir_);
    for (const auto& [name, content] : files_) write_atomic((std::filesystem::path(dir_) / name).string(), content);
  }

 private:
  std::string dir_;
  std::vector<std::pair<std::string, std::string>> files_;
};

std::optional<ReadoutModel> load_noise(const Options& o) {
  if (o.noise.empty()) return std::nullopt;
  try {
    return ReadoutModel::load(o.noise);
  } catch (const std::exception& e) {
    throw UsageError("cannot load noise model: " + std::string(e.what()));
  }
}

// ------------------------------------------------------------------ verify

int cmd_verify(const Options& o, std::ostream& out, std::ostream& err) {
  CategoryData cat;
  if (!o.corrupt_f.empty()) {
    const auto colon = o.corrupt_f.find(':');
    if (colon == std::string::npos) throw UsageError("--corrupt-f expects INDEX:DELTA");
    cat = cat.with_f_perturbed(std::stoi(o.corrupt_f.substr(0, colon)), std::stod(o.corrupt_f.substr(colon + 1)));
  }
  std::vector<std::pair<std::string, double>> checks;
  const auto rep = verify_category(cat);
  checks = {{"pentagon", rep.pentagon},
            {"unitarity", rep.unitarity},
            {"tetrahedral", rep.tetrahedral},
            {"normalization", rep.normalization},
            {"physicality", rep.physicality},
            {"f_block_unitarity", rep.f_block_unitarity},
            {"b_unitarity", rep.b_unitarity},
            {"yang_baxter", rep.yang_baxter}};
  const auto bp = build_bp_generic(cat);
  double idem = 0, herm = 0;
  for (const auto& b : bp.blocks) {
    idem = std::max(idem, (b * b - b).cwiseAbs().maxCoeff());
    herm = std::max(herm, (b - b.adjoint()).cwiseAbs().maxCoeff());
  }
  checks.emplace_back("bp_idempotence", idem);
  checks.emplace_back("bp_hermiticity", herm);
  for (Preset p : {Preset::single_plaquette, Preset::two_plaquette}) {
    const std::string tag = to_string(p);
    double dev = 0, fid = 0;
    try {
      const auto L = build_layout(p);
      StateVector sv(o.max_qubits);
      prepare_ground_state(sv, L, cat);
      for (double q : measure_qv_all(sv, L)) dev = std::max(dev, std::abs(1 - q));
      for (int k = 0; k < static_cast<int>(L.plaquettes.size()); ++k)
        dev = std::max(dev, std::abs(1 - measure_bp(sv, L, k, cat)));
      fid = 1 - std::norm(ground_state_oracle(L, cat).inner(sv));
    } catch (const std::exception& e) {
      err << "ground state check on " << tag << " raised: " << e.what() << '\n';
      dev = fid = std::numeric_limits<double>::infinity();
    }
    checks.emplace_back(tag + "_operators", dev);
    checks.emplace_back(tag + "_oracle_infidelity", std::abs(fid));
  }
  json j;
  json jc = json::object();
  std::vector<std::string> failed;
  for (const auto& [name, r] : checks) {
    const bool ok = std::isfinite(r) && r < kCheckTol;
    jc[name] = {{"residual", std::isfinite(r) ? json(r) : json(nullptr)}, {"pass", ok}};
    out << (ok ? "PASS " : "FAIL ") << name << " " << fmt(r) << '\n';
    if (!ok) failed.push_back(name);
  }
  j["checks"] = jc;
  j["tolerance"] = kCheckTol;
  j["record"] = rep.to_record(cat);
  j["pass"] = failed.empty();
  Outputs files(o.out);
  files.add("verify.json", j.dump(2) + "\n");
  files.commit();
  if (!failed.empty()) {
    err << "failed checks:";
    for (const auto& f : failed) err << ' ' << f;
    err << '\n';
    return kCheckFailed;
  }
  return kOk;
}

// ------------------------------------------------------------------ ground

int cmd_ground(const Options& o, std::ostream& out, std::ostream&) {
  const auto L = build_layout(parse_preset(o.preset));
  const auto noise = load_noise(o);
  const std::uint64_t shots = o.shots.value_or(0);
  const bool sampled = shots > 0 || noise;
  if (sampled && shots == 0) throw UsageError("noisy ground mode needs --shots");
  StateVector sv(o.max_qubits, sampled ? require_seed(o, "sampled ground mode") : 0);
  prepare_ground_state(sv, L);
  auto rng = rng_stream(o.seed.value_or(0), 0);
  const ReadoutModel* nm = noise ? &*noise : nullptr;

  json rows = json::array();
  std::ostringstream csv;
  csv << "kind,site,qubits,exact,sampled\n";
  auto emit = [&](const std::string& kind, const std::string& site, const std::vector<QubitId>& qs, double exact,
                  std::optional<double> est) {
    std::string label;
    for (std::size_t k = 0; k < qs.size(); ++k) label += (k ? " " : "") + qs[k].str();
    rows.push_back({{"kind", kind}, {"site", site}, {"qubits", label}, {"exact", exact}, {"sampled", num_or_null(est)}});
    csv << kind << ',' << site << ',' << label << ',' << fmt(exact) << ',' << (est ? fmt(*est) : "") << '\n';
  };
  for (std::size_t v = 0; v < L.vertices.size(); ++v) {
    const auto& vx = L.vertices[v];
    std::optional<double> est;
    if (sampled) {
      const Counts c = sv.sample(vx.edges, shots, rng, nm);
      const auto diag = build_qv(vx);
      double acc = 0;
      for (std::size_t k = 0; k < c.counts.size(); ++k) acc += diag[k] * static_cast<double>(c.counts[k]);
      est = acc / static_cast<double>(shots);
    }
    emit("Q_v", std::to_string(v), vx.edges, measure_qv(sv, vx), est);
  }
  for (int p = 0; p < static_cast<int>(L.plaquettes.size()); ++p) {
    const auto op = build_bp(L, p);
    std::optional<double> est;
    if (sampled) {
      const auto terms = pauli_decompose(op);
      est = sampled_pauli_expectation(sv, terms, group_bases(terms), word_qubits(op), shots, rng, nm);
    }
    emit("B_p", L.plaquettes[p].name, word_qubits(op), measure_operator(sv, op), est);
  }
  json j;
  j["preset"] = to_string(L.preset);
  j["shots"] = shots;
  j["noise"] = noise ? json::parse(noise->to_json()) : json(nullptr);
  j["rows"] = rows;
  Outputs files(o.out);
  files.add("ground.json", j.dump(2) + "\n");
  files.add("ground.csv", csv.str());
  files.commit();
  for (const auto& r : rows) out << r["kind"].get<std::string>() << ' ' << r["site"].get<std::string>() << ' ' << fmt(r["exact"].get<double>()) << '\n';
  return kOk;
}

// ------------------------------------------------------------------- braid

int cmd_braid(const Options& o, std::ostream& out, std::ostream& err) {
  std::vector<std::string> words = o.words;
  if (words.empty()) words = {"", "s2", "s1,s2", "s2,s1,s2", "s2,s2"};
  std::vector<BraidWord> parsed;
  for (const auto& w : words) parsed.push_back(parse_braid_word(w));
  const auto L = build_layout(parse_preset(o.preset));
  if (L.tails.size() != 2) throw UsageError("braiding needs the three_plaquette_fig1b preset");
  const std::uint64_t shots = o.shots.value_or(0);
  StateVector gs(o.max_qubits, shots > 0 ? require_seed(o, "sampled braiding") : 0);
  prepare_ground_state(gs, L);
  json records = json::array();
  std::ostringstream csv;
  csv << "word,p_1_1,p_1_tau,p_tau_1,p_tau_tau,oracle_1,oracle_tau,M_tautau,d_est\n";
  const BraidWord monodromy{Generator::s2, Generator::s2};
  bool agree = true;
  for (const auto& w : parsed) {
    BraidExperiment e;
    e.word = w;
    e.shots = shots;
    const auto r = run_braiding_experiment(gs, L, e);
    std::optional<double> m, d;
    if (w == monodromy) {
      // <0|sigma2^2|0> is real and negative, so its sign is fixed.
      m = -std::sqrt(r.p[0][0]);
      d = quantum_dimension_from_monodromy(*m);
    }
    const double dev = std::max(std::abs(r.p_vac() - r.oracle_vac), std::abs(1 - r.p_vac() - r.oracle_tau));
    agree = agree && dev < 1e-8 && r.discordance() < 1e-9;
    json rec = {{"word", format_braid_word(w)},
                {"P(1,1)", r.p[0][0]},
                {"P(1,tau)", r.p[0][1]},
                {"P(tau,1)", r.p[1][0]},
                {"P(tau,tau)", r.p[1][1]},
                {"oracle", {{"P(1)", r.oracle_vac}, {"P(tau)", r.oracle_tau}}},
                {"max_deviation", dev},
                {"M_tautau", num_or_null(m)},
                {"d_est", num_or_null(d)}};
    if (r.counts) {
      json c = json::object();
      for (std::size_t k = 0; k < r.counts->counts.size(); ++k)
        if (r.counts->counts[k]) c[r.counts->bitstring(k)] = r.counts->counts[k];
      rec["counts"] = c;
      rec["shots"] = shots;
    }
    records.push_back(rec);
    csv << '"' << format_braid_word(w) << "\"," << fmt(r.p[0][0]) << ',' << fmt(r.p[0][1]) << ',' << fmt(r.p[1][0]) << ','
        << fmt(r.p[1][1]) << ',' << fmt(r.oracle_vac) << ',' << fmt(r.oracle_tau) << ',' << (m ? fmt(*m) : "") << ','
        << (d ? fmt(*d) : "") << '\n';
    out << "word '" << format_braid_word(w) << "' P(1,1)=" << fmt(r.p[0][0]) << " oracle=" << fmt(r.oracle_vac);
    if (d) out << " M_tautau=" << fmt(*m) << " d_est=" << fmt(*d);
    out << '\n';
  }
  Outputs files(o.out);
  files.add("braid.json", records.dump(2) + "\n");
  files.add("braid.csv", csv.str());
  files.commit();
  if (!agree) {
    err << "circuit and braid-representation oracle disagree\n";
    return kCheckFailed;
  }
  return kOk;
}

// --------------------------------------------------------------------- tee

int cmd_tee(const Options& o, std::ostream& out, std::ostream&) {
  const auto L = build_layout(parse_preset(o.preset));
  if (L.preset != Preset::three_plaquette_fig1b) throw UsageError("tee needs the three_plaquette_fig1b preset");
  if (o.mode != "exact" && o.mode != "rm") throw UsageError("--mode must be exact or rm");
  const auto sv = tee_state(L);
  const auto exact = exact_report(sv, L);
  EntropyReport rep = exact;
  json extra;
  if (o.mode == "exact") {
    json vn = json::array();
    for (const auto& s : tee_partition_schemes(L)) vn.push_back(stopo_exact_vn(sv, s));
    extra["stopo_von_neumann"] = vn;
  } else {
    RMConfig cfg;
    cfg.ensemble = parse_ensemble(o.ensemble);
    cfg.instances = o.instances;
    cfg.shots = o.shots.value_or(0);
    cfg.exact = cfg.shots == 0;
    cfg.seed = require_seed(o, "tee --mode rm");
    cfg.noise = load_noise(o);
    cfg.mitigate = o.mitigate;
    try {
      cfg.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    rep = rm_stopo(sv, L, cfg);
    extra["exact_mean"] = exact.mean;
    json within = json::array();
    for (std::size_t k = 0; k < rep.schemes.size(); ++k)
      within.push_back(std::abs(rep.schemes[k].stopo - exact.schemes[k].stopo) <= 3 * rep.schemes[k].stderr_);
    extra["within_3_stderr"] = within;
    extra["config"] = {{"ensemble", to_string(cfg.ensemble)}, {"instances", cfg.instances}, {"shots", cfg.shots},
                       {"seed", cfg.seed}, {"mitigate", cfg.mitigate}};
  }
  extra["minus_ln_D"] = -std::log(CategoryData::total_dimension_squared());
  extra["area_alpha"] = area_alpha();
  json j = json::parse(rep.to_json());
  j["extra"] = extra;
  Outputs files(o.out);
  files.add("tee.json", j.dump(2) + "\n");
  files.add("tee_regions.csv", rep.regions_csv());
  files.add("tee_schemes.csv", rep.schemes_csv());
  files.commit();
  for (const auto& s : rep.schemes)
    out << "orientation " << s.orientation << " division " << s.division << " S_topo " << fmt(s.stopo) << '\n';
  out << "mean " << fmt(rep.mean) << '\n';
  return kOk;
}

// ---------------------------------------------------------------- mitigate

int cmd_mitigate(const Options& o, std::ostream& out, std::ostream&) {
  const auto noise = load_noise(o);
  if (!noise) throw UsageError("mitigate needs --noise <path>");
  const std::uint64_t shots = o.shots.value_or(2000);
  const std::uint64_t seed = shots > 0 ? require_seed(o, "mitigate with finite shots") : o.seed.value_or(0);
  if (shots == 1) throw UsageError("--shots must be 0 (exact) or at least 2");
  if (o.max_size < 1 || o.max_size > 8) throw UsageError("--max-size must be in [1, 8]");
  if (o.repetitions < 1) throw UsageError("--repetitions must be >= 1");
  const Kernel1q k1{2.0, -1.0, -1.0, 2.0};
  std::ostringstream csv;
  csv << "size,naive,corrected,truth,shots\n";
  json rows = json::array();
  for (int n = 1; n <= o.max_size; ++n) {
    std::vector<QubitId> qs;
    for (int k = 0; k < n; ++k) qs.push_back(QubitId{0, k});
    const auto R = noise->response(qs);
    // Synthetic truth: a flat-Dirichlet draw.
    auto rng = rng_stream(seed, static_cast<std::uint64_t>(n));
    std::gamma_distribution<double> gamma(1.0, 1.0);
    std::vector<double> t(std::size_t{1} << n);
    double norm = 0;
    for (auto& x : t) norm += (x = gamma(rng));
    for (auto& x : t) x /= norm;
    const double truth = kernel_quadratic(t, k1, n);
    const auto m = apply_readout_noise(Distribution{t, 0}, R);
    double naive = 0, corrected = 0;
    if (shots == 0) {
      naive = kernel_quadratic(ibu(m, R).p, k1, n);
      corrected = naive;
    } else {
      std::vector<double> nv(static_cast<std::size_t>(o.repetitions)), cv(nv.size());
      parallel_for(nv.size(), [&](std::size_t r) {
        auto local = rng_stream(seed + 0x9e37ULL * static_cast<std::uint64_t>(n), r);
        std::discrete_distribution<std::size_t> pick(m.p.begin(), m.p.end());
        std::vector<std::uint64_t> counts(m.p.size(), 0);
        for (std::uint64_t s = 0; s < shots; ++s) ++counts[pick(local)];
        Distribution d = Distribution::from_counts(counts);
        nv[r] = kernel_quadratic(ibu(d, R).p, k1, n);
        cv[r] = mitigated_kernel_quadratic(d, R, k1);
      });
      naive = compensated_sum(nv) / static_cast<double>(nv.size());
      corrected = compensated_sum(cv) / static_cast<double>(cv.size());
    }
    rows.push_back({{"size", n}, {"naive", naive}, {"corrected", corrected}, {"truth", truth}, {"shots", shots}});
    csv << n << ',' << fmt(naive) << ',' << fmt(corrected) << ',' << fmt(truth) << ',' << shots << '\n';
    out << "size " << n << " naive " << fmt(naive) << " corrected " << fmt(corrected) << " truth " << fmt(truth) << '\n';
  }
  json j;
  j["repetitions"] = shots == 0 ? 1 : o.repetitions;
  j["noise"] = json::parse(noise->to_json());
  j["rows"] = rows;
  Outputs files(o.out);
  files.add("mitigate.json", j.dump(2) + "\n");
  files.add("mitigate.csv", csv.str());
  files.commit();
  return kOk;
}

// ------------------------------------------------------------------- bench

int cmd_bench(const Options& o, std::ostream& out, std::ostream&) {
  using clock = std::chrono::steady_clock;
  json j = json::object();
  auto time = [&](const std::string& name, const std::function<void()>& f) {
    const auto t0 = clock::now();
    f();
    const double s = std::chrono::duration<double>(clock::now() - t0).count();
    j[name] = s;
    out << name << ' ' << fmt(s) << " s\n";
  };
  time("gate_1q_x50_20q", [] {
    StateVector sv(20);
    for (int k = 0; k < 20; ++k) sv.alloc(QubitId{0, k});
    const QubitId t[] = {QubitId{0, 7}};
    for (int r = 0; r < 50; ++r) sv.apply(us_gate(), t);
  });
  for (Preset p : {Preset::single_plaquette, Preset::two_plaquette, Preset::three_plaquette_fig1b})
    time("ground_" + to_string(p), [&] {
      StateVector sv(o.max_qubits);
      prepare_ground_state(sv, build_layout(p));
    });
  time("pauli_decompose_bp", [] { (void)pauli_decompose(build_bp_generic()); });
  time("rm_10_instances", [] {
    const auto L = build_layout(Preset::three_plaquette_fig1b);
    RMConfig cfg;
    cfg.instances = 10;
    cfg.bootstrap = 0;
    (void)rm_stopo(tee_state(L), L, cfg);
  });
  j["workers"] = worker_count();
  Outputs files(o.out);
  files.add("bench.json", j.dump(2) + "\n");
  files.commit();
  return kOk;
}

}  // namespace

void write_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + tmp);
    f << content;
    f.flush();
    if (!f) {
      std::filesystem::remove(tmp);
      throw std::runtime_error("cannot write " + tmp);
    }
  }
  std::filesystem::rename(tmp, path);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Fibonacci string-net simulator", args.empty() ? "fibstring" : args[0]};
  app.set_config("--config", "", "Key = value config file (needs schema_version = 1)");
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--preset", o.preset, "Lattice: single_plaquette | two_plaquette | three_plaquette_fig1b");
  app.add_option("--seed", o.seed, "Seed for sampled modes");
  app.add_option("--instances", o.instances, "Randomized-measurement instances")->check(CLI::PositiveNumber);
  app.add_option("--shots", o.shots, "Shots per setting; 0 means exact probabilities");
  app.add_option("--ensemble", o.ensemble, "haar | clifford");
  app.add_option("--noise", o.noise, "Readout model JSON file");
  app.add_option("--out", o.out, "Output directory");
  app.add_option("--max-qubits", o.max_qubits, "Register capacity")->check(CLI::Range(1, 30));
  app.add_option("--schema-version,--schema_version", o.schema_version, "Config schema version")->group("");

  auto* verify = app.add_subcommand("verify", "Category identities and small-lattice invariants");
  verify->add_option("--corrupt-f", o.corrupt_f, "Test hook: INDEX:DELTA added to one F entry")->group("");
  app.add_subcommand("ground", "Prepare the ground state and report <Q_v>, <B_p>");
  auto* braid = app.add_subcommand("braid", "Braiding experiments against the braid-representation oracle");
  braid->add_option("--word", o.words, "Braid word such as s2,s1,s2 (repeatable)")->allow_extra_args(false);
  auto* tee = app.add_subcommand("tee", "Topological entanglement entropy");
  tee->add_option("--mode", o.mode, "exact | rm");
  tee->add_flag("--mitigate", o.mitigate, "IBU with error propagation (needs --noise)");
  auto* mitigate = app.add_subcommand("mitigate", "Naive vs covariance-corrected IBU estimators");
  mitigate->add_option("--repetitions", o.repetitions, "Synthetic repetitions per size");
  mitigate->add_option("--max-size", o.max_size, "Largest subsystem size");
  app.add_subcommand("bench", "Timing of the main kernels");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kUsage;
  }
  try {
    if (app.get_option("--config")->count() > 0 && o.schema_version != kSchemaVersion)
      throw UsageError("config file must declare schema_version = " + std::to_string(kSchemaVersion));
    const auto* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "verify") return cmd_verify(o, out, err);
    if (name == "ground") return cmd_ground(o, out, err);
    if (name == "braid") return cmd_braid(o, out, err);
    if (name == "tee") return cmd_tee(o, out, err);
    if (name == "mitigate") return cmd_mitigate(o, out, err);
    return cmd_bench(o, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kCheckFailed;
  }
}

}  // namespace fibstring::cli
