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

#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fibstring/mitigation.hpp"
#include "fibstring/qubit.hpp"

namespace fibstring {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using DensityMatrix = Eigen::MatrixXcd;

class EngineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by StateVector::run; the state is rolled back before it propagates.
class GateSequenceError : public EngineError {
 public:
  GateSequenceError(std::size_t index, const std::string& what)
      : EngineError("event " + std::to_string(index) + ": " + what), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

struct GateEvent {
  enum class Kind { apply, alloc, free };
  Kind kind = Kind::apply;
  Matrix u;
  std::vector<QubitId> targets;
  std::vector<Control> controls;
  QubitId qubit;
};

class GateSequence {
 public:
  void apply(Matrix u, std::vector<QubitId> targets, std::vector<Control> controls = {});
  void alloc(const QubitId& q);
  void free(const QubitId& q);
  void append(const GateSequence& other);

  /// Reversed events with U -> U^dagger and alloc <-> free.
  GateSequence adjoint() const;

  const std::vector<GateEvent>& events() const { return events_; }
  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }

 private:
  std::vector<GateEvent> events_;
};

/// Outcome counts over an ordered subset; bit k of an outcome index belongs to
/// qubits[k].
struct Counts {
  std::vector<QubitId> qubits;
  std::vector<std::uint64_t> counts;
  std::uint64_t shots = 0;

  /// Bitstring with qubits in ascending grid order, leftmost first.
  std::string bitstring(std::size_t outcome) const;
  /// `bitstring,count` rows for nonzero counts, sorted by bitstring.
  std::string to_csv() const;
};

/// Dense state vector over a dynamic register. Register position k is bit k
/// of the amplitude index.
class StateVector {
 public:
  explicit StateVector(int max_qubits = 28, std::uint64_t seed = 0);

  int num_qubits() const { return static_cast<int>(reg_.size()); }
  int max_qubits() const { return max_qubits_; }
  const std::vector<QubitId>& register_order() const { return reg_; }
  bool contains(const QubitId& q) const;
  int position(const QubitId& q) const;

  const std::vector<cplx>& amplitudes() const { return amp_; }
  /// Replaces the amplitudes; size must match the register.
  void set_amplitudes(std::vector<cplx> amps);
  /// Amplitudes re-indexed so that bit k belongs to order[k]; order must be a
  /// permutation of the register.
  std::vector<cplx> amplitudes_in_order(const std::vector<QubitId>& order) const;

  /// Pre-allocates storage for n qubits.
  void reserve(int n);
  void alloc(const QubitId& q);
  void free(const QubitId& q);

  /// Applies U (2^k x 2^k, k = targets.size() <= 5 for GateSequence use) to the
  /// targets when every control holds its value. targets[j] is bit j of U's
  /// row/column index.
  void apply(const Matrix& u, std::span<const QubitId> targets, std::span<const Control> controls = {});
  void apply(const Matrix& u, std::initializer_list<QubitId> targets,
             std::initializer_list<Control> controls = {}) {
    apply(u, std::span<const QubitId>(targets.begin(), targets.size()),
          std::span<const Control>(controls.begin(), controls.size()));
  }
  /// Block-controlled map: for each value v of the control qubits (bit k of v
  /// is controls[k]) applies blocks[v] to the targets. Empty blocks mean
  /// identity. With check_unitary=false the map may be any linear operator;
  /// the result is then left unnormalized.
  void apply_blocks(std::span<const QubitId> targets, std::span<const QubitId> controls,
                    const std::vector<Matrix>& blocks, bool check_unitary = true);

  void run(const GateSequence& seq);

  double norm() const;
  void normalize();
  /// <this|other>; registers must hold the same qubits.
  cplx inner(const StateVector& other) const;

  /// Probabilities over the subset; bit k of the outcome index is subset[k].
  std::vector<double> probabilities(std::span<const QubitId> subset) const;
  Counts sample(std::span<const QubitId> subset, std::uint64_t shots, const ReadoutModel* noise = nullptr);
  Counts sample(std::span<const QubitId> subset, std::uint64_t shots, std::mt19937_64& rng,
                const ReadoutModel* noise = nullptr) const;

  static constexpr int kDefaultTraceBound = 12;
  DensityMatrix partial_trace(std::span<const QubitId> keep, int bound = kDefaultTraceBound) const;
  /// Both use the smaller of (subset, complement), which has the same
  /// nonzero spectrum for a pure state.
  double renyi2(std::span<const QubitId> subset) const;
  double von_neumann(std::span<const QubitId> subset) const;
  /// Eigenvalues of the reduced state of the smaller side, ascending.
  std::vector<double> entanglement_spectrum(std::span<const QubitId> subset) const;

  /// <psi|O|psi> for Hermitian O on the subset (bit k of O's index is subset[k]).
  double expectation(const Matrix& op, std::span<const QubitId> subset) const;
  /// Expectation of a block-controlled operator (see apply_blocks). Blocks must
  /// be Hermitian; empty blocks contribute zero.
  double expectation_blocks(std::span<const QubitId> targets, std::span<const QubitId> controls,
                            const std::vector<Matrix>& blocks) const;
  /// Expectation of a diagonal operator given by its values over the subset.
  double expectation_diagonal(std::span<const QubitId> subset, const std::vector<double>& diag) const;

  std::mt19937_64& rng() { return rng_; }
  void reseed(std::uint64_t seed) { rng_.seed(seed); }

  void save_snapshot(const std::string& path) const;
  static StateVector load_snapshot(const std::string& path, int max_qubits = 28);

 private:
  void insert_qubit(const QubitId& q, int pos);
  void apply_one(const Matrix& u, const std::vector<int>& tpos, const std::vector<int>& fixed,
                 std::uint64_t fixed_value);
  std::vector<int> positions(std::span<const QubitId> qs, const char* what) const;
  void check_disjoint(const std::vector<int>& a, const std::vector<int>& b) const;
  void validate_event(const GateEvent& ev) const;

  int max_qubits_;
  std::vector<QubitId> reg_;
  std::vector<cplx> amp_;
  std::mt19937_64 rng_;
};

/// max |U^dagger U - I|.
double unitarity_residual(const Matrix& u);

/// Dense reference for tests: the full 2^n matrix of a gate on a register of
/// n qubits.
Matrix dense_gate(const Matrix& u, const std::vector<int>& target_positions,
                  const std::vector<std::pair<int, int>>& controls, int n_qubits);

}  // namespace fibstring
