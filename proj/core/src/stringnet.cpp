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

#include "fibstring/stringnet.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace fibstring {
namespace {

constexpr double kWeightTol = 1e-8;

bool admissible(int a, int b, int c) { return CategoryData::delta(a, b, c) != 0; }

// M[e][f] = F^{abe}_{cdf} on valid labels, completed to a unitary.
Matrix f_block(const CategoryData& cat, int a, int b, int c, int d) {
  Matrix m = Matrix::Zero(2, 2);
  std::vector<int> ve, vf, ie, iff;
  for (int x = 0; x < 2; ++x) {
    (admissible(a, b, x) && admissible(c, d, x) ? ve : ie).push_back(x);
    (admissible(a, d, x) && admissible(b, c, x) ? vf : iff).push_back(x);
  }
  for (int e : ve)
    for (int f : vf) m(e, f) = cat.f(a, b, e, c, d, f);
  for (std::size_t k = 0; k < ie.size() && k < iff.size(); ++k) m(ie[k], iff[k]) = 1.0;
  return m;
}

std::vector<QubitId> distinct_qubits(const std::array<Wire, 4>& wires) {
  std::vector<QubitId> out;
  for (const auto& w : wires)
    if (w.qubit && std::find(out.begin(), out.end(), *w.qubit) == out.end()) out.push_back(*w.qubit);
  return out;
}

std::array<int, 4> wire_values(const std::array<Wire, 4>& wires, const std::vector<QubitId>& qs,
                               std::size_t assignment) {
  std::array<int, 4> v{};
  for (int k = 0; k < 4; ++k) {
    if (!wires[k].qubit) {
      v[k] = wires[k].label;
    } else {
      auto it = std::find(qs.begin(), qs.end(), *wires[k].qubit);
      v[k] = static_cast<int>((assignment >> (it - qs.begin())) & 1);
    }
  }
  return v;
}

bool fixed_is(const Wire& w, int label) { return !w.qubit && w.label == label; }
bool same_qubit(const Wire& x, const Wire& y) { return x.qubit && y.qubit && *x.qubit == *y.qubit; }

std::vector<QubitId> sorted(std::vector<QubitId> v) {
  std::sort(v.begin(), v.end());
  return v;
}

// One step of a preparation circuit.
struct PrepStep {
  std::vector<QubitId> loop;
  std::optional<FMoveGate> move;
};

std::vector<QubitId> own_edges(const LatticeLayout& layout, int p) {
  std::vector<QubitId> out;
  for (const auto& e : layout.plaquettes[p].inner) {
    int uses = 0;
    for (const auto& q : layout.plaquettes)
      uses += static_cast<int>(std::count(q.inner.begin(), q.inner.end(), e));
    if (uses == 1) out.push_back(e);
  }
  return out;
}

// Any qubit of `edges` touching vertex v.
QubitId at_vertex(const LatticeLayout& layout, int v, const std::vector<QubitId>& edges) {
  for (const auto& e : layout.vertices[v].edges)
    if (std::find(edges.begin(), edges.end(), e) != edges.end()) return e;
  throw std::logic_error("layout: no loop edge at vertex");
}

std::vector<PrepStep> preparation_plan(const LatticeLayout& layout) {
  std::vector<PrepStep> plan;
  switch (layout.preset) {
    case Preset::single_plaquette: {
      const auto& in = layout.plaquettes[0].inner;
      plan.push_back({{in.begin(), in.end()}, std::nullopt});
      break;
    }
    case Preset::two_plaquette: {
      auto a = own_edges(layout, 0), b = own_edges(layout, 1);
      plan.push_back({a, std::nullopt});
      plan.push_back({b, std::nullopt});
      // Shared edge s joins V1 = (s, a0, b4) and V2 = (s, a4, b0).
      QubitId s;
      for (const auto& e : layout.plaquettes[0].inner)
        if (std::find(a.begin(), a.end(), e) == a.end()) s = e;
      std::vector<int> vs;
      for (int v = 0; v < static_cast<int>(layout.vertices.size()); ++v) {
        const auto& ed = layout.vertices[v].edges;
        if (std::find(ed.begin(), ed.end(), s) != ed.end()) vs.push_back(v);
      }
      const QubitId a1 = at_vertex(layout, vs[0], a), b1 = at_vertex(layout, vs[0], b);
      const QubitId a2 = at_vertex(layout, vs[1], a), b2 = at_vertex(layout, vs[1], b);
      plan.push_back({{}, FMoveGate{{Wire::on(b1), Wire::on(a1), Wire::on(a2), Wire::on(b2)}, s}});
      break;
    }
    case Preset::three_plaquette_fig1b: {
      // Inner edges i1 (A|B), i2 (B|C), i3 (C|A) meet at the center vertex.
      const auto& A = layout.plaquettes[0];
      const auto& B = layout.plaquettes[1];
      const auto& C = layout.plaquettes[2];
      const QubitId i1 = A.inner[0], i3 = A.inner[5], i2 = B.inner[0];
      auto a = own_edges(layout, 0), b = own_edges(layout, 1), c = own_edges(layout, 2);
      auto b_plus = b;
      b_plus.push_back(i3);
      plan.push_back({a, std::nullopt});
      plan.push_back({b_plus, std::nullopt});
      plan.push_back({c, std::nullopt});
      const int v1 = layout.vertex_between(i1, A.inner[1]);
      const int v2 = layout.vertex_between(i2, B.inner[1]);
      const int v3 = layout.vertex_between(i3, C.inner[1]);
      const QubitId av = at_vertex(layout, v1, a), bv = at_vertex(layout, v1, b);
      const QubitId bw = at_vertex(layout, v2, b), cw = at_vertex(layout, v2, c);
      const QubitId cx = at_vertex(layout, v3, c), ax = at_vertex(layout, v3, a);
      plan.push_back({{}, FMoveGate{{Wire::on(bv), Wire::on(av), Wire::on(av), Wire::on(bv)}, i1}});
      plan.push_back({{}, FMoveGate{{Wire::on(cw), Wire::on(bw), Wire::on(bw), Wire::on(cw)}, i2}});
      plan.push_back({{}, FMoveGate{{Wire::on(cx), Wire::on(ax), Wire::on(i1), Wire::on(i2)}, i3}});
      break;
    }
  }
  return plan;
}

void append_loop(GateSequence& seq, const std::vector<QubitId>& edges) {
  auto e = sorted(edges);
  seq.apply(us_gate(), {e[0]});
  for (std::size_t k = 1; k < e.size(); ++k) seq.apply(x_gate(), {e[k]}, {Control{e[0], 1}});
}

}  // namespace

// ------------------------------------------------------------------ gates

Matrix us_gate() {
  Matrix u(2, 2);
  const double n = 1.0 / std::sqrt(1.0 + kPhi * kPhi);
  u << n, n * kPhi, n * kPhi, -n;
  return u;
}

Matrix x_gate() {
  Matrix u(2, 2);
  u << 0, 1, 1, 0;
  return u;
}

Matrix ur_gate(const CategoryData& cat, bool inverse) {
  Matrix u = Matrix::Zero(2, 2);
  u(0, 0) = cat.r(kTau, kTau, kVac);
  u(1, 1) = cat.r(kTau, kTau, kTau);
  return inverse ? Matrix(u.adjoint()) : u;
}

std::vector<QubitId> FMoveGate::control_qubits() const {
  auto qs = distinct_qubits(wires);
  if (std::find(qs.begin(), qs.end(), target) != qs.end())
    throw std::invalid_argument("F-move target cannot be one of its wires");
  return qs;
}

std::vector<Matrix> FMoveGate::blocks(const CategoryData& cat) const {
  const auto qs = control_qubits();
  std::vector<Matrix> out;
  for (std::size_t v = 0; v < (std::size_t{1} << qs.size()); ++v) {
    auto w = wire_values(wires, qs, v);
    Matrix m = f_block(cat, w[0], w[1], w[2], w[3]);
    out.push_back(inverse ? Matrix(m.adjoint()) : m);
  }
  return out;
}

std::string FMoveGate::specialization() const {
  const auto& [a, b, c, d] = wires;
  if (fixed_is(a, kTau) && fixed_is(b, kTau) && same_qubit(c, d)) return "F9";
  if (fixed_is(a, kTau) && fixed_is(b, kTau)) return "F6";
  if (fixed_is(a, kTau) && fixed_is(d, kTau)) return "F7";
  if (fixed_is(a, kTau) && fixed_is(c, kTau)) return "F8";
  if (same_qubit(a, b) && same_qubit(c, d)) return "F5";
  if (same_qubit(a, b)) return "F2";
  if (fixed_is(a, kTau)) return "F3";
  if (fixed_is(a, kVac)) return "F4";
  return "F1";
}

void FMoveGate::append_to(GateSequence& seq, const CategoryData& cat) const {
  const auto qs = control_qubits();
  const auto bl = blocks(cat);
  for (std::size_t v = 0; v < bl.size(); ++v) {
    if (bl[v].isIdentity(1e-15)) continue;
    std::vector<Control> ctl;
    for (std::size_t k = 0; k < qs.size(); ++k) ctl.push_back({qs[k], static_cast<int>((v >> k) & 1)});
    seq.apply(bl[v], {target}, ctl);
  }
}

double f_move_invalid_weight(const StateVector& sv, const FMoveGate& gate) {
  auto qs = gate.control_qubits();
  qs.push_back(gate.target);
  const auto p = sv.probabilities(qs);
  const std::size_t tbit = std::size_t{1} << (qs.size() - 1);
  double bad = 0;
  for (std::size_t o = 0; o < p.size(); ++o) {
    if (p[o] == 0) continue;
    const auto w = wire_values(gate.wires, qs, o & (tbit - 1));
    const int t = (o & tbit) ? 1 : 0;
    const bool ok = gate.inverse ? admissible(w[0], w[1], t) && admissible(w[2], w[3], t)
                                 : admissible(w[0], w[3], t) && admissible(w[1], w[2], t);
    if (!ok) bad += p[o];
  }
  return bad;
}

void f_move(StateVector& sv, const FMoveGate& gate, const CategoryData& cat) {
  const double bad = f_move_invalid_weight(sv, gate);
  if (bad > kWeightTol)
    throw EngineError("F-move on " + gate.target.str() + ": input violates branching (weight " +
                      std::to_string(bad) + ")");
  const auto qs = gate.control_qubits();
  const QubitId t[] = {gate.target};
  sv.apply_blocks(t, qs, gate.blocks(cat));
}

void r_move(StateVector& sv, const RMoveGate& gate, const CategoryData& cat) {
  const QubitId t[] = {gate.target};
  sv.apply(ur_gate(cat, gate.inverse), t, gate.controls);
}

// ------------------------------------------------------------ preparation

void prepare_loop(StateVector& sv, const std::vector<QubitId>& edges) {
  if (edges.empty()) throw std::invalid_argument("prepare_loop: no edges");
  const auto p = sv.probabilities(edges);
  if (1.0 - p[0] > kWeightTol) throw EngineError("prepare_loop: loop edges are not in |0>");
  GateSequence seq;
  append_loop(seq, edges);
  sv.run(seq);
}

void prepare_loop(StateVector& sv, const PlaquetteSpec& plaquette) {
  prepare_loop(sv, std::vector<QubitId>(plaquette.inner.begin(), plaquette.inner.end()));
}

void prepare_ground_state(StateVector& sv, const LatticeLayout& layout, const CategoryData& cat) {
  if (sv.num_qubits() == 0) {
    sv.reserve(static_cast<int>(layout.edges.size()));
    for (const auto& e : layout.edges) sv.alloc(e);
  }
  const auto p = sv.probabilities(layout.edges);
  if (1.0 - p[0] > kWeightTol) throw EngineError("prepare_ground_state: edges are not in |0>");
  for (const auto& step : preparation_plan(layout)) {
    if (step.move) {
      f_move(sv, *step.move, cat);
    } else {
      GateSequence seq;
      append_loop(seq, step.loop);
      sv.run(seq);
    }
  }
}

GateSequence ground_state_sequence(const LatticeLayout& layout, const CategoryData& cat) {
  GateSequence seq;
  for (const auto& step : preparation_plan(layout)) {
    if (step.move)
      step.move->append_to(seq, cat);
    else
      append_loop(seq, step.loop);
  }
  return seq;
}

StateVector ground_state_oracle(const LatticeLayout& layout, const CategoryData& cat) {
  StateVector sv(static_cast<int>(layout.edges.size()));
  for (const auto& e : layout.edges) sv.alloc(e);
  for (int p = 0; p < static_cast<int>(layout.plaquettes.size()); ++p) {
    apply_operator(sv, build_bp(layout, p, cat));
    sv.normalize();
  }
  return sv;
}

// --------------------------------------------------------------- operators

std::vector<double> build_qv(const Vertex& vertex) {
  const std::size_t n = vertex.edges.size();
  std::vector<double> d(std::size_t{1} << n);
  for (std::size_t x = 0; x < d.size(); ++x) {
    const int a = x & 1, b = (x >> 1) & 1;
    if (n == 2)
      d[x] = a == b ? 1.0 : 0.0;
    else if (n == 3)
      d[x] = admissible(a, b, static_cast<int>((x >> 2) & 1)) ? 1.0 : 0.0;
    else
      throw std::invalid_argument("vertex must be bivalent or trivalent");
  }
  return d;
}

double measure_qv(const StateVector& sv, const Vertex& vertex) {
  return sv.expectation_diagonal(vertex.edges, build_qv(vertex));
}

std::vector<double> measure_qv_all(const StateVector& sv, const LatticeLayout& layout) {
  std::vector<double> out;
  for (const auto& v : layout.vertices) out.push_back(measure_qv(sv, v));
  return out;
}

Matrix PlaquetteOperator::dense() const {
  const std::size_t dim = std::size_t{1} << inner.size();
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(dim * blocks.size()),
                          static_cast<Eigen::Index>(dim * blocks.size()));
  for (std::size_t v = 0; v < blocks.size(); ++v)
    m.block(static_cast<Eigen::Index>(v * dim), static_cast<Eigen::Index>(v * dim), static_cast<Eigen::Index>(dim),
            static_cast<Eigen::Index>(dim)) = blocks[v];
  return m;
}

PlaquetteOperator build_string_operator(const ClosedBoundary& boundary, int s, const CategoryData& cat) {
  const std::size_t n = boundary.segments.size();
  if (n < 2 || boundary.legs.size() != n) throw std::invalid_argument("boundary needs one leg per segment");
  if (n > 10) throw std::invalid_argument("boundary too long");
  PlaquetteOperator op;
  op.inner = boundary.segments;
  std::vector<int> leg_slot(n, -1);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& leg = boundary.legs[k];
    if (leg.kind != VertexLeg::Kind::qubit) continue;
    auto it = std::find(op.controls.begin(), op.controls.end(), leg.qubit);
    if (it == op.controls.end()) {
      leg_slot[k] = static_cast<int>(op.controls.size());
      op.controls.push_back(leg.qubit);
    } else {
      leg_slot[k] = static_cast<int>(it - op.controls.begin());
    }
  }
  const std::size_t dim = std::size_t{1} << n;
  for (std::size_t v = 0; v < (std::size_t{1} << op.controls.size()); ++v) {
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t src = 0; src < dim; ++src) {
      for (std::size_t dst = 0; dst < dim; ++dst) {
        cplx amp = 1.0;
        for (std::size_t k = 0; k < n && amp != cplx(0, 0); ++k) {
          const std::size_t k1 = (k + 1) % n;
          const int prev = (src >> k) & 1, next = (src >> k1) & 1;
          const int prev2 = (dst >> k) & 1, next2 = (dst >> k1) & 1;
          const auto& leg = boundary.legs[k];
          if (leg.kind == VertexLeg::Kind::tail_in) {
            amp *= cat.b(next, leg.label, prev, s, prev2, next2);
          } else {
            const int l = leg.kind == VertexLeg::Kind::qubit ? static_cast<int>((v >> leg_slot[k]) & 1) : leg.label;
            amp *= cat.f(l, next, prev, s, prev2, next2);
          }
        }
        m(static_cast<Eigen::Index>(dst), static_cast<Eigen::Index>(src)) = amp;
      }
    }
    op.blocks.push_back(std::move(m));
  }
  return op;
}

PlaquetteOperator build_projector(const ClosedBoundary& boundary, const CategoryData& cat) {
  auto op = build_string_operator(boundary, kVac, cat);
  const auto op1 = build_string_operator(boundary, kTau, cat);
  const double D = CategoryData::total_dimension_squared();
  for (std::size_t v = 0; v < op.blocks.size(); ++v)
    op.blocks[v] = (op.blocks[v] + CategoryData::qdim(kTau) * op1.blocks[v]) / D;
  return op;
}

ClosedBoundary plaquette_boundary(const PlaquetteSpec& spec) {
  ClosedBoundary b;
  b.segments.assign(spec.inner.begin(), spec.inner.end());
  for (const auto& o : spec.outer) b.legs.push_back(o ? VertexLeg::on(*o) : VertexLeg::fixed(kVac));
  return b;
}

PlaquetteOperator build_bp(const PlaquetteSpec& spec, const CategoryData& cat) {
  return build_projector(plaquette_boundary(spec), cat);
}

PlaquetteOperator build_bp(const LatticeLayout& layout, int p, const CategoryData& cat) {
  if (p < 0 || p >= static_cast<int>(layout.plaquettes.size())) throw std::out_of_range("plaquette index");
  auto op = build_bp(layout.plaquettes[p], cat);
  op.plaquette = p;
  return op;
}

PlaquetteOperator build_bp_generic(const CategoryData& cat) {
  PlaquetteSpec spec;
  spec.name = "generic";
  for (int k = 0; k < 6; ++k) {
    spec.inner[k] = QubitId{0, k};
    spec.outer[k] = QubitId{1, k};
  }
  return build_bp(spec, cat);
}

double measure_operator(const StateVector& sv, const PlaquetteOperator& op) {
  // Real part of <O>: closed strings with tails are Hermitian only on the
  // branching-valid subspace, so the blocks are symmetrized first.
  std::vector<Matrix> h;
  h.reserve(op.blocks.size());
  for (const auto& b : op.blocks) h.push_back((b + b.adjoint()) / 2.0);
  return sv.expectation_blocks(op.inner, op.controls, h);
}

double measure_bp(const StateVector& sv, const LatticeLayout& layout, int p, const CategoryData& cat) {
  return measure_operator(sv, build_bp(layout, p, cat));
}

void apply_operator(StateVector& sv, const PlaquetteOperator& op) {
  sv.apply_blocks(op.inner, op.controls, op.blocks, false);
}

}  // namespace fibstring
