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

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fibstring/stringnet.hpp"

namespace fibstring {
namespace {

constexpr double kWeightTol = 1e-8;

const PlaquetteSpec& plaquette(const LatticeLayout& layout, int p) {
  if (p < 0 || p >= static_cast<int>(layout.plaquettes.size())) throw std::out_of_range("plaquette index");
  return layout.plaquettes[p];
}

// True when plaquette p's boundary reaches `vertex` right after `host`.
bool runs_forward(const LatticeLayout& layout, int p, const QubitId& host, int vertex) {
  const auto& in = plaquette(layout, p).inner;
  for (int k = 0; k < 6; ++k) {
    if (in[k] != host) continue;
    if (layout.vertex_between(in[k], in[(k + 1) % 6]) == vertex) return true;
    if (layout.vertex_between(in[(k + 5) % 6], in[k]) == vertex) return false;
    throw std::invalid_argument("pair vertex is not an end of " + host.str());
  }
  throw std::invalid_argument(host.str() + " is not on plaquette " + std::to_string(p));
}

QubitId first(const AnyonPair& p) { return p.forward ? p.host : p.copy; }
QubitId last(const AnyonPair& p) { return p.forward ? p.copy : p.host; }

// Joins the two tails into the fusion segment (inverse: splits them off).
FMoveGate detach_gate(const AnyonPair& p) {
  return FMoveGate{{Wire::fixed(kTau), Wire::fixed(kTau), Wire::on(last(p)), Wire::on(first(p))}, p.fusion};
}

void apply_cx(StateVector& sv, const QubitId& control, const QubitId& target) {
  const QubitId t[] = {target};
  const Control c[] = {{control, 1}};
  sv.apply(x_gate(), t, c);
}

// Projects `q` onto |0>; returns the weight that survived.
double project_zero(StateVector& sv, const QubitId& q) {
  const QubitId t[] = {q};
  const double w = sv.probabilities(t)[0];
  if (w <= 1e-12) return w;
  Matrix p0 = Matrix::Zero(2, 2);
  p0(0, 0) = 1;
  sv.apply_blocks(t, {}, {p0}, false);
  sv.normalize();
  return w;
}

}  // namespace

AnyonPair create_pair(StateVector& sv, const LatticeLayout& layout, const TailSite& site, int side,
                      const CategoryData& cat) {
  AnyonPair p;
  p.host = site.host;
  p.fusion = site.fusion;
  p.copy = site.copy;
  p.vertex = site.vertex;
  p.side = side;
  p.forward = runs_forward(layout, side, site.host, site.vertex);
  sv.alloc(p.copy);
  apply_cx(sv, p.host, p.copy);
  sv.alloc(p.fusion);
  f_move(sv, FMoveGate{{Wire::on(first(p)), Wire::fixed(kTau), Wire::fixed(kTau), Wire::on(last(p))}, p.fusion},
         cat);
  p.attached = true;
  return p;
}

void flip_tail(StateVector& sv, AnyonPair& pair, int tail, const CategoryData& cat) {
  if (!pair.attached) throw std::logic_error("flip_tail: pair is not attached");
  if (tail != 0 && tail != 1) throw std::out_of_range("tail must be 0 or 1");
  const QubitId neighbour = tail == 0 ? pair.host : pair.copy;
  // The junction met first along the side boundary turns the other way.
  const bool first_junction = (tail == 0) == pair.forward;
  r_move(sv, RMoveGate{{{neighbour, kTau}}, pair.fusion, first_junction != pair.flipped[tail]}, cat);
  pair.flipped[tail] = !pair.flipped[tail];
}

void fuse_pair(StateVector& sv, AnyonPair& pair, const CategoryData& cat) {
  if (!pair.attached) throw std::logic_error("fuse_pair: pair is not attached");
  if (pair.flipped[0] || pair.flipped[1]) throw std::logic_error("fuse_pair: unflip the tails first");
  f_move(sv, detach_gate(pair), cat);
  pair.attached = false;
}

void release_pair(StateVector& sv, AnyonPair& pair) {
  if (pair.attached) throw std::logic_error("release_pair: fuse the pair first");
  sv.free(pair.fusion);
  apply_cx(sv, pair.host, pair.copy);
  sv.free(pair.copy);
  pair.vertex = -1;
}

double tail_charge(const StateVector& sv, const AnyonPair& pair, int tail) {
  if (tail != 0 && tail != 1) throw std::out_of_range("tail must be 0 or 1");
  if (!sv.contains(pair.fusion)) return 1.0;
  if (pair.attached) return 0.0;
  // Detached: the tail is the fusion segment hanging off (host, copy).
  const QubitId qs[] = {pair.host, pair.copy, pair.fusion};
  std::vector<double> diag(8, 0.0);
  for (int x = 0; x < 8; ++x) {
    const int h = x & 1, c = (x >> 1) & 1, f = (x >> 2) & 1;
    diag[x] = (f == kVac && CategoryData::delta(h, c, f)) ? 1.0 : 0.0;
  }
  return sv.expectation_diagonal(qs, diag);
}

ClosedBoundary tailed_boundary(const LatticeLayout& layout, int p, const std::vector<AnyonPair>& pairs) {
  const auto base = plaquette_boundary(plaquette(layout, p));
  ClosedBoundary out;
  for (std::size_t k = 0; k < base.segments.size(); ++k) {
    const QubitId& e = base.segments[k];
    auto it = std::find_if(pairs.begin(), pairs.end(),
                           [&](const AnyonPair& a) { return a.host == e && a.vertex >= 0; });
    if (it == pairs.end()) {
      out.segments.push_back(e);
      out.legs.push_back(base.legs[k]);
      continue;
    }
    const AnyonPair& a = *it;
    const bool fwd = runs_forward(layout, p, a.host, a.vertex);
    if (!a.attached) {
      out.segments.push_back(fwd ? a.host : a.copy);
      out.legs.push_back(VertexLeg::on(a.fusion));
      out.segments.push_back(fwd ? a.copy : a.host);
      out.legs.push_back(base.legs[k]);
      continue;
    }
    auto tail_leg = [&](int t) {
      const bool inward = (p == a.side) != a.flipped[t];
      return inward ? VertexLeg::tail(kTau) : VertexLeg::fixed(kTau);
    };
    out.segments.push_back(fwd ? a.host : a.copy);
    out.legs.push_back(tail_leg(fwd ? 0 : 1));
    out.segments.push_back(a.fusion);
    out.legs.push_back(tail_leg(fwd ? 1 : 0));
    out.segments.push_back(fwd ? a.copy : a.host);
    out.legs.push_back(base.legs[k]);
  }
  return out;
}

double closed_string_expectation(const StateVector& sv, const LatticeLayout& layout, int p,
                                 const std::vector<AnyonPair>& pairs, const CategoryData& cat) {
  auto op = build_projector(tailed_boundary(layout, p, pairs), cat);
  op.plaquette = p;
  return measure_operator(sv, op);
}

// ----------------------------------------------------------------- braids

BraidCircuit::BraidCircuit(StateVector& sv, const LatticeLayout& layout, const std::vector<TailSite>& sites,
                           const CategoryData& cat)
    : sv_(sv), cat_(cat) {
  if (sites.size() != 2) throw std::invalid_argument("braiding needs two tail sites");
  if (sites[0].vertex != sites[1].vertex) throw std::invalid_argument("tail sites must share a vertex");
  int side = -1;
  for (int p = 0; p < static_cast<int>(layout.plaquettes.size()); ++p) {
    const auto& in = layout.plaquettes[p].inner;
    if (std::count(in.begin(), in.end(), sites[0].host) && std::count(in.begin(), in.end(), sites[1].host)) side = p;
  }
  if (side < 0) throw std::invalid_argument("tail hosts do not bound a common plaquette");
  const auto& vedges = layout.vertices.at(sites[0].vertex).edges;
  auto j = std::find_if(vedges.begin(), vedges.end(),
                        [&](const QubitId& q) { return q != sites[0].host && q != sites[1].host; });
  if (j == vedges.end()) throw std::invalid_argument("tail vertex has no junction edge");
  junction_ = *j;
  for (const auto& s : sites) pairs_.push_back(create_pair(sv_, layout, s, side, cat_));
  if (!pairs_[0].forward || pairs_[1].forward)
    throw std::invalid_argument("tail sites must be listed along the side plaquette's boundary");
}

void BraidCircuit::sigma1(bool inverse) {
  const auto g = detach_gate(pairs_[0]);
  auto g_inv = g;
  g_inv.inverse = true;
  f_move(sv_, g, cat_);
  r_move(sv_, RMoveGate{{}, pairs_[0].fusion, inverse}, cat_);
  f_move(sv_, g_inv, cat_);
}

void BraidCircuit::sigma2(bool inverse) {
  const auto& p1 = pairs_[0];
  const auto& p2 = pairs_[1];
  const FMoveGate slide{{Wire::on(p1.fusion), Wire::on(junction_), Wire::on(p2.copy), Wire::fixed(kTau)}, p1.copy};
  const FMoveGate change{{Wire::fixed(kTau), Wire::fixed(kTau), Wire::on(p2.fusion), Wire::on(p1.copy)}, p2.copy};
  auto slide_inv = slide;
  slide_inv.inverse = true;
  auto change_inv = change;
  change_inv.inverse = true;
  f_move(sv_, slide, cat_);
  f_move(sv_, change, cat_);
  r_move(sv_, RMoveGate{{}, p2.copy, inverse}, cat_);
  f_move(sv_, change_inv, cat_);
  f_move(sv_, slide_inv, cat_);
}

void BraidCircuit::apply_word(const BraidWord& word) {
  for (auto it = word.rbegin(); it != word.rend(); ++it) {
    if (*it == Generator::s1)
      sigma1();
    else
      sigma2();
  }
}

std::array<std::array<double, 2>, 2> BraidCircuit::fuse() {
  for (auto& p : pairs_) fuse_pair(sv_, p, cat_);
  const QubitId qs[] = {pairs_[0].fusion, pairs_[1].fusion};
  const auto pr = sv_.probabilities(qs);
  return {{{pr[0], pr[2]}, {pr[1], pr[3]}}};
}

bool BraidCircuit::release_vacuum() {
  for (const auto& p : pairs_)
    if (p.attached) throw std::logic_error("release_vacuum: fuse first");
  for (const auto& p : pairs_)
    if (project_zero(sv_, p.fusion) <= 1e-12) return false;
  for (auto& p : pairs_) release_pair(sv_, p);
  return true;
}

BraidResult run_braiding_experiment(const StateVector& ground, const LatticeLayout& layout,
                                    const BraidExperiment& exp, const CategoryData& cat) {
  StateVector sv = ground;
  const auto sites = exp.sites.empty() ? layout.tails : exp.sites;
  BraidCircuit circuit(sv, layout, sites, cat);
  circuit.apply_word(exp.word);
  BraidResult r;
  r.word = exp.word;
  r.p = circuit.fuse();
  const auto oracle = fusion_probabilities(apply_braid_word(exp.word, LogicalState::zero(), braid_generators(cat)));
  r.oracle_vac = oracle.vac;
  r.oracle_tau = oracle.tau;
  if (exp.shots > 0) {
    const QubitId qs[] = {circuit.pairs()[0].fusion, circuit.pairs()[1].fusion};
    r.counts = sv.sample(qs, exp.shots);
  }
  if (r.p[0][0] > kWeightTol) r.released = circuit.release_vacuum();
  return r;
}

}  // namespace fibstring
