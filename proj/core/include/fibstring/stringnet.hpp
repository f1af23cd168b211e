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
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fibstring/category.hpp"
#include "fibstring/engine.hpp"
#include "fibstring/lattice.hpp"

namespace fibstring {

// ------------------------------------------------------------------ gates

/// (1/sqrt(1+phi^2)) [[1, phi], [phi, -1]]
Matrix us_gate();
Matrix x_gate();
/// diag(R^1_tt, R^t_tt), or its inverse.
Matrix ur_gate(const CategoryData& cat = CategoryData::fibonacci(), bool inverse = false);

/// A string feeding an F-move: a qubit or a fixed label.
struct Wire {
  std::optional<QubitId> qubit;
  int label = kVac;

  static Wire on(const QubitId& q) { return {q, kVac}; }
  static Wire fixed(int label) { return {std::nullopt, label}; }
};

/// F-move on `target`. Before the move the target carries f, joined to
/// vertices (a, d, f) and (b, c, f); afterwards it carries e, joined to
/// (a, b, e) and (c, d, e), with amplitude F^{abe}_{cdf}.
///
/// For each control assignment the valid inputs map unitarily onto the valid
/// outputs. Invalid inputs are sent to the remaining outputs in order, which
/// is the identity whenever the valid sets agree.
struct FMoveGate {
  std::array<Wire, 4> wires;
  QubitId target;
  bool inverse = false;

  /// Distinct control qubits in wire order.
  std::vector<QubitId> control_qubits() const;
  /// One 2x2 block per assignment of control_qubits() (bit k = qubit k).
  std::vector<Matrix> blocks(const CategoryData& cat = CategoryData::fibonacci()) const;
  /// F1 (full) or one of the reduced variants F2-F9, from the wire pattern.
  std::string specialization() const;
  /// Number of qubits the gate touches.
  int arity() const { return static_cast<int>(control_qubits().size()) + 1; }
  /// Appends controlled applies equivalent to the gate.
  void append_to(GateSequence& seq, const CategoryData& cat = CategoryData::fibonacci()) const;
};

/// Weight on control/target states that violate branching at the input
/// vertices of the move.
double f_move_invalid_weight(const StateVector& sv, const FMoveGate& gate);
/// Throws EngineError when f_move_invalid_weight exceeds 1e-8.
void f_move(StateVector& sv, const FMoveGate& gate, const CategoryData& cat = CategoryData::fibonacci());

/// diag(R^1_tt, R^t_tt) on `target` when all controls hold their values.
struct RMoveGate {
  std::vector<Control> controls;
  QubitId target;
  bool inverse = false;
};

void r_move(StateVector& sv, const RMoveGate& gate, const CategoryData& cat = CategoryData::fibonacci());

// ------------------------------------------------------------ preparation

/// U_S on the smallest edge, then CX from it onto the others.
void prepare_loop(StateVector& sv, const std::vector<QubitId>& edges);
void prepare_loop(StateVector& sv, const PlaquetteSpec& plaquette);

/// Allocates the layout's edge qubits if the register is empty, then
/// prepares the string-net ground state of the preset.
void prepare_ground_state(StateVector& sv, const LatticeLayout& layout,
                          const CategoryData& cat = CategoryData::fibonacci());

/// The same circuit as a GateSequence acting on already allocated edges.
GateSequence ground_state_sequence(const LatticeLayout& layout, const CategoryData& cat = CategoryData::fibonacci());

/// Brute-force reference: prod_p B_p |0...0> on the layout's edge qubits,
/// normalized, built from dense plaquette operators.
StateVector ground_state_oracle(const LatticeLayout& layout, const CategoryData& cat = CategoryData::fibonacci());

// --------------------------------------------------------------- operators

/// Q_v eigenvalues over the vertex's edges (bit k = edges[k]).
std::vector<double> build_qv(const Vertex& vertex);
double measure_qv(const StateVector& sv, const Vertex& vertex);
std::vector<double> measure_qv_all(const StateVector& sv, const LatticeLayout& layout);

/// Where a boundary vertex of a closed string gets its third string.
struct VertexLeg {
  enum class Kind { qubit, fixed, tail_in };
  Kind kind = Kind::fixed;
  QubitId qubit;
  int label = kVac;

  static VertexLeg on(const QubitId& q) { return {Kind::qubit, q, kVac}; }
  static VertexLeg fixed(int label) { return {Kind::fixed, {}, label}; }
  /// A tail of the given type pointing into the enclosed region.
  static VertexLeg tail(int label) { return {Kind::tail_in, {}, label}; }
};

/// Closed boundary: legs[k] meets the loop between segments[k] and
/// segments[k+1 mod n]. Outward legs contribute F^{leg,next,prev}_{s,prev',next'};
/// inward tails contribute B^{next,tail,prev}_{s,prev',next'}.
struct ClosedBoundary {
  std::vector<QubitId> segments;
  std::vector<VertexLeg> legs;
};

/// Block form of a closed string operator: one dense block over the segment
/// qubits per assignment of the leg qubits.
struct PlaquetteOperator {
  int plaquette = -1;
  std::vector<QubitId> inner;
  std::vector<QubitId> controls;
  std::vector<Matrix> blocks;

  /// Full matrix with bit k = inner[k] for k < |inner|, then the controls.
  Matrix dense() const;
};

/// Single type-s string (B^s) around the boundary.
PlaquetteOperator build_string_operator(const ClosedBoundary& boundary, int s,
                                        const CategoryData& cat = CategoryData::fibonacci());
/// sum_s (d_s / D) B^s with D = 1 + phi^2.
PlaquetteOperator build_projector(const ClosedBoundary& boundary,
                                  const CategoryData& cat = CategoryData::fibonacci());

ClosedBoundary plaquette_boundary(const PlaquetteSpec& spec);
PlaquetteOperator build_bp(const PlaquetteSpec& spec, const CategoryData& cat = CategoryData::fibonacci());
PlaquetteOperator build_bp(const LatticeLayout& layout, int p, const CategoryData& cat = CategoryData::fibonacci());
/// Twelve-qubit B_p with all six legs present: inner Q(0,k), outer Q(1,k).
PlaquetteOperator build_bp_generic(const CategoryData& cat = CategoryData::fibonacci());
double measure_operator(const StateVector& sv, const PlaquetteOperator& op);
double measure_bp(const StateVector& sv, const LatticeLayout& layout, int p,
                  const CategoryData& cat = CategoryData::fibonacci());
/// Applies a (not necessarily unitary) block operator in place.
void apply_operator(StateVector& sv, const PlaquetteOperator& op);

// ----------------------------------------------------------------- anyons

/// A tau pair cut into the host edge next to `vertex`. The edge becomes
/// host - fusion - copy (copy touching the vertex) with a tau tail at each
/// of the two new junctions.
struct AnyonPair {
  QubitId host;
  QubitId fusion;
  QubitId copy;
  int vertex = -1;
  /// Plaquette the tails point into.
  int side = -1;
  /// Boundary of `side` runs host, fusion, copy (else copy, fusion, host).
  bool forward = true;
  bool attached = false;
  /// Tail 0 sits at host|fusion, tail 1 at fusion|copy.
  std::array<bool, 2> flipped{false, false};
};

/// Allocates copy and fusion qubits and attaches a tau pair on site.host.
AnyonPair create_pair(StateVector& sv, const LatticeLayout& layout, const TailSite& site, int side,
                      const CategoryData& cat = CategoryData::fibonacci());
/// Rotates one tail to the other side of its string (controlled R-move).
void flip_tail(StateVector& sv, AnyonPair& pair, int tail, const CategoryData& cat = CategoryData::fibonacci());
/// Detaches the tails; the fusion qubit then holds the pair's fusion channel.
void fuse_pair(StateVector& sv, AnyonPair& pair, const CategoryData& cat = CategoryData::fibonacci());
/// After fusing to vacuum: uncomputes the copy and frees both tail qubits.
void release_pair(StateVector& sv, AnyonPair& pair);

/// <delta_{s,0} Q_v> at one tail vertex of the pair.
double tail_charge(const StateVector& sv, const AnyonPair& pair, int tail);

/// Boundary of plaquette p with the given pairs spliced into their host edges.
ClosedBoundary tailed_boundary(const LatticeLayout& layout, int p, const std::vector<AnyonPair>& pairs);
/// <O_p> for plaquette p, including any pairs sitting on its edges.
double closed_string_expectation(const StateVector& sv, const LatticeLayout& layout, int p,
                                 const std::vector<AnyonPair>& pairs = {},
                                 const CategoryData& cat = CategoryData::fibonacci());

struct BraidExperiment {
  BraidWord word;
  /// Defaults to the layout's two tail sites.
  std::vector<TailSite> sites;
  std::uint64_t shots = 0;
};

struct BraidResult {
  BraidWord word;
  /// p[x1][x2] over the two fusion qubits (0 = vacuum, 1 = tau).
  std::array<std::array<double, 2>, 2> p{};
  double oracle_vac = 0;
  double oracle_tau = 0;
  /// Sampled counts over (fusion1, fusion2) when shots > 0.
  std::optional<Counts> counts;
  /// True when the pairs fused to vacuum and the tail qubits were released.
  bool released = false;

  double p_vac() const { return p[0][0] + p[0][1]; }
  double discordance() const { return p[0][1] + p[1][0]; }
};

/// Runs creation, the word (rightmost letter first), fusion and readout on
/// a copy of the ground state.
BraidResult run_braiding_experiment(const StateVector& ground, const LatticeLayout& layout,
                                    const BraidExperiment& exp,
                                    const CategoryData& cat = CategoryData::fibonacci());

/// Braid experiment state after creation, exposed for stage-wise tests.
class BraidCircuit {
 public:
  BraidCircuit(StateVector& sv, const LatticeLayout& layout, const std::vector<TailSite>& sites,
               const CategoryData& cat = CategoryData::fibonacci());
  void sigma1(bool inverse = false);
  void sigma2(bool inverse = false);
  void apply_word(const BraidWord& word);
  /// Detaches both pairs and returns p[x1][x2].
  std::array<std::array<double, 2>, 2> fuse();
  /// Projects onto the vacuum outcome and releases the tail qubits; false when
  /// that outcome has no weight.
  bool release_vacuum();
  std::vector<AnyonPair>& pairs() { return pairs_; }

 private:
  StateVector& sv_;
  const CategoryData& cat_;
  std::vector<AnyonPair> pairs_;
  QubitId junction_;
};

// ------------------------------------------------------------------ Pauli

struct PauliTerm {
  std::string word;
  double coeff = 0;
};

/// Pauli expansion; character k of each word acts on qubit k of the operator
/// (inner qubits first, then the controls).
struct PauliTermSet {
  int n_qubits = 0;
  std::vector<PauliTerm> terms;
};

PauliTermSet pauli_decompose(const PlaquetteOperator& op, double threshold = 1e-12);
/// Generic dense version for small operators.
PauliTermSet pauli_decompose(const Matrix& m, double threshold = 1e-12);

struct BasisGroups {
  /// Measurement basis per group over {X,Y,Z}; 'I' marks a free qubit.
  std::vector<std::string> bases;
  /// Group index of each term, aligned with the PauliTermSet.
  std::vector<int> assignment;
};

/// Greedy first-fit by descending |coefficient| with qubit-wise compatibility.
BasisGroups group_bases(const PauliTermSet& terms);

/// Qubits of the operator in word order: inner qubits, then the controls.
std::vector<QubitId> word_qubits(const PlaquetteOperator& op);

/// Estimates sum_k c_k <P_k> from `shots` readouts per measurement basis.
/// Each group's basis rotation is applied and undone in place.
double sampled_pauli_expectation(StateVector& sv, const PauliTermSet& terms, const BasisGroups& groups,
                                 const std::vector<QubitId>& qubits, std::uint64_t shots, std::mt19937_64& rng,
                                 const ReadoutModel* noise = nullptr);

/// Rebuilds the block form (same inner/control split as `like`).
std::vector<Matrix> reconstruct_blocks(const PauliTermSet& terms, const PlaquetteOperator& like);

}  // namespace fibstring
