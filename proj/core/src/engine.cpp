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

#include "fibstring/engine.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "fibstring/parallel.hpp"

namespace fibstring {

namespace {

constexpr double kUnitaryTol = 1e-12;
constexpr double kHermitianTol = 1e-10;
constexpr double kFreeTol = 1e-8;
constexpr std::uint64_t kGrain = std::uint64_t{1} << 13;

// Maps a compact integer (bit k) onto scattered bit positions pos[k], using
// one 256-entry table per byte of the input.
class Deposit {
 public:
  explicit Deposit(const std::vector<int>& pos) {
    const std::size_t nbytes = (pos.size() + 7) / 8;
    tables_.assign(nbytes, std::array<std::uint64_t, 256>{});
    for (std::size_t b = 0; b < nbytes; ++b) {
      for (unsigned v = 0; v < 256; ++v) {
        std::uint64_t out = 0;
        for (unsigned k = 0; k < 8; ++k) {
          std::size_t idx = b * 8 + k;
          if (idx < pos.size() && (v >> k & 1u)) out |= std::uint64_t{1} << pos[idx];
        }
        tables_[b][v] = out;
      }
    }
  }
  std::uint64_t operator()(std::uint64_t x) const {
    std::uint64_t out = 0;
    for (std::size_t b = 0; b < tables_.size(); ++b) out |= tables_[b][(x >> (8 * b)) & 0xff];
    return out;
  }

 private:
  std::vector<std::array<std::uint64_t, 256>> tables_;
};

std::vector<int> complement_positions(int n, const std::vector<int>& used) {
  std::vector<char> mark(n, 0);
  for (int p : used) mark[p] = 1;
  std::vector<int> out;
  for (int p = 0; p < n; ++p)
    if (!mark[p]) out.push_back(p);
  return out;
}

std::uint64_t scatter_value(std::uint64_t v, const std::vector<int>& pos) {
  std::uint64_t out = 0;
  for (std::size_t k = 0; k < pos.size(); ++k)
    if (v >> k & 1u) out |= std::uint64_t{1} << pos[k];
  return out;
}

std::size_t task_count(std::uint64_t n_items) { return static_cast<std::size_t>((n_items + kGrain - 1) / kGrain); }

std::vector<cplx> row_major(const Matrix& u) {
  std::vector<cplx> out(static_cast<std::size_t>(u.rows() * u.cols()));
  for (Eigen::Index r = 0; r < u.rows(); ++r)
    for (Eigen::Index c = 0; c < u.cols(); ++c) out[r * u.cols() + c] = u(r, c);
  return out;
}

bool is_diagonal(const Matrix& u) {
  for (Eigen::Index r = 0; r < u.rows(); ++r)
    for (Eigen::Index c = 0; c < u.cols(); ++c)
      if (r != c && u(r, c) != cplx(0, 0)) return false;
  return true;
}

double hermitian_residual(const Matrix& op) { return (op - op.adjoint()).cwiseAbs().maxCoeff(); }

}  // namespace

double unitarity_residual(const Matrix& u) {
  if (u.rows() != u.cols()) return std::numeric_limits<double>::infinity();
  return (u.adjoint() * u - Matrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
}

Matrix dense_gate(const Matrix& u, const std::vector<int>& tpos, const std::vector<std::pair<int, int>>& controls,
                  int n) {
  const std::uint64_t dim = std::uint64_t{1} << n;
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  const std::size_t k = tpos.size();
  for (std::uint64_t x = 0; x < dim; ++x) {
    bool on = true;
    for (auto [p, v] : controls) on = on && static_cast<int>(x >> p & 1u) == v;
    if (!on) {
      out(x, x) = 1.0;
      continue;
    }
    std::uint64_t j = 0, cleared = x;
    for (std::size_t t = 0; t < k; ++t) {
      j |= (x >> tpos[t] & 1u) << t;
      cleared &= ~(std::uint64_t{1} << tpos[t]);
    }
    for (std::uint64_t i = 0; i < (std::uint64_t{1} << k); ++i) {
      std::uint64_t row = cleared | scatter_value(i, tpos);
      out(row, x) += u(i, j);
    }
  }
  return out;
}

// ---------------------------------------------------------------- sequences

void GateSequence::apply(Matrix u, std::vector<QubitId> targets, std::vector<Control> controls) {
  GateEvent ev;
  ev.kind = GateEvent::Kind::apply;
  ev.u = std::move(u);
  ev.targets = std::move(targets);
  ev.controls = std::move(controls);
  events_.push_back(std::move(ev));
}

void GateSequence::alloc(const QubitId& q) {
  GateEvent ev;
  ev.kind = GateEvent::Kind::alloc;
  ev.qubit = q;
  events_.push_back(std::move(ev));
}

void GateSequence::free(const QubitId& q) {
  GateEvent ev;
  ev.kind = GateEvent::Kind::free;
  ev.qubit = q;
  events_.push_back(std::move(ev));
}

void GateSequence::append(const GateSequence& other) {
  events_.insert(events_.end(), other.events_.begin(), other.events_.end());
}

GateSequence GateSequence::adjoint() const {
  GateSequence out;
  for (auto it = events_.rbegin(); it != events_.rend(); ++it) {
    GateEvent ev = *it;
    switch (ev.kind) {
      case GateEvent::Kind::apply: ev.u = ev.u.adjoint().eval(); break;
      case GateEvent::Kind::alloc: ev.kind = GateEvent::Kind::free; break;
      case GateEvent::Kind::free: ev.kind = GateEvent::Kind::alloc; break;
    }
    out.events_.push_back(std::move(ev));
  }
  return out;
}

// ---------------------------------------------------------------- counts

std::string Counts::bitstring(std::size_t outcome) const {
  std::vector<std::size_t> order(qubits.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return qubits[a] < qubits[b]; });
  std::string s;
  s.reserve(order.size());
  for (auto k : order) s.push_back((outcome >> k & 1u) ? '1' : '0');
  return s;
}

std::string Counts::to_csv() const {
  std::vector<std::pair<std::string, std::uint64_t>> rows;
  for (std::size_t i = 0; i < counts.size(); ++i)
    if (counts[i]) rows.emplace_back(bitstring(i), counts[i]);
  std::sort(rows.begin(), rows.end());
  std::ostringstream out;
  out << "bitstring,count\n";
  for (const auto& [b, c] : rows) out << b << ',' << c << '\n';
  return out.str();
}

// ---------------------------------------------------------------- state

StateVector::StateVector(int max_qubits, std::uint64_t seed) : max_qubits_(max_qubits), amp_{cplx(1, 0)}, rng_(seed) {
  if (max_qubits < 0 || max_qubits > 40) throw EngineError("unsupported register capacity");
}

bool StateVector::contains(const QubitId& q) const { return std::find(reg_.begin(), reg_.end(), q) != reg_.end(); }

int StateVector::position(const QubitId& q) const {
  auto it = std::find(reg_.begin(), reg_.end(), q);
  if (it == reg_.end()) throw EngineError("qubit " + q.str() + " is not registered");
  return static_cast<int>(it - reg_.begin());
}

std::vector<int> StateVector::positions(std::span<const QubitId> qs, const char* what) const {
  std::vector<int> out;
  out.reserve(qs.size());
  for (const auto& q : qs) {
    auto it = std::find(reg_.begin(), reg_.end(), q);
    if (it == reg_.end()) throw EngineError(std::string(what) + " " + q.str() + " is not registered");
    out.push_back(static_cast<int>(it - reg_.begin()));
  }
  std::vector<int> sorted = out;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw EngineError(std::string("repeated ") + what + " wire");
  return out;
}

void StateVector::check_disjoint(const std::vector<int>& a, const std::vector<int>& b) const {
  for (int x : a)
    if (std::find(b.begin(), b.end(), x) != b.end()) throw EngineError("targets and controls overlap");
}

void StateVector::set_amplitudes(std::vector<cplx> amps) {
  if (amps.size() != amp_.size()) throw EngineError("amplitude count does not match the register");
  amp_ = std::move(amps);
}

std::vector<cplx> StateVector::amplitudes_in_order(const std::vector<QubitId>& order) const {
  if (order.size() != reg_.size()) throw EngineError("order is not a permutation of the register");
  auto pos = positions(order, "qubit");
  Deposit dep(pos);
  std::vector<cplx> out(amp_.size());
  parallel_for(task_count(amp_.size()), [&](std::size_t t) {
    std::uint64_t lo = t * kGrain, hi = std::min<std::uint64_t>(amp_.size(), lo + kGrain);
    for (std::uint64_t x = lo; x < hi; ++x) out[x] = amp_[dep(x)];
  });
  return out;
}

void StateVector::reserve(int n) {
  if (n > max_qubits_) throw EngineError("reserve exceeds register capacity");
  amp_.reserve(std::size_t{1} << n);
}

void StateVector::insert_qubit(const QubitId& q, int pos) {
  const std::size_t old = amp_.size();
  amp_.resize(old * 2, cplx(0, 0));
  const int n = num_qubits();
  if (pos < n) {
    const std::uint64_t low = (std::uint64_t{1} << pos) - 1;
    for (std::uint64_t i = old; i-- > 0;) {
      std::uint64_t j = (i & low) | ((i & ~low) << 1);
      amp_[j] = amp_[i];
      if (j != i) amp_[i] = 0;
    }
    // Entries with bit `pos` set are stale copies; clear them.
    const std::uint64_t bit = std::uint64_t{1} << pos;
    for (std::uint64_t i = 0; i < amp_.size(); ++i)
      if (i & bit) amp_[i] = 0;
  }
  reg_.insert(reg_.begin() + pos, q);
}

void StateVector::alloc(const QubitId& q) {
  if (contains(q)) throw EngineError("qubit " + q.str() + " already allocated");
  if (num_qubits() + 1 > max_qubits_)
    throw EngineError("register capacity of " + std::to_string(max_qubits_) + " qubits exceeded");
  insert_qubit(q, num_qubits());
}

void StateVector::free(const QubitId& q) {
  const int p = position(q);
  const std::uint64_t bit = std::uint64_t{1} << p;
  const std::size_t half = amp_.size() / 2;
  std::vector<double> part(task_count(half), 0.0);
  const std::uint64_t low = bit - 1;
  parallel_for(part.size(), [&](std::size_t t) {
    std::uint64_t lo = t * kGrain, hi = std::min<std::uint64_t>(half, lo + kGrain);
    double s = 0;
    for (std::uint64_t i = lo; i < hi; ++i) s += std::norm(amp_[((i & ~low) << 1) | bit | (i & low)]);
    part[t] = s;
  });
  const double w = compensated_sum(part);
  if (w > kFreeTol) {
    std::ostringstream msg;
    msg << "cannot free " << q.str() << ": weight " << w << " on |1>";
    throw EngineError(msg.str());
  }
  for (std::uint64_t i = 0; i < half; ++i) amp_[i] = amp_[((i & ~low) << 1) | (i & low)];
  amp_.resize(half);
  reg_.erase(reg_.begin() + p);
  if (w > 0) {
    const double s = 1.0 / std::sqrt(1.0 - w);
    for (auto& a : amp_) a *= s;
  }
}

void StateVector::apply_one(const Matrix& u, const std::vector<int>& tpos, const std::vector<int>& fixed,
                            std::uint64_t fixed_value) {
  const int n = num_qubits();
  std::vector<int> used = tpos;
  used.insert(used.end(), fixed.begin(), fixed.end());
  const std::vector<int> rest = complement_positions(n, used);
  const Deposit dep(rest);
  const std::uint64_t fmask = scatter_value(fixed_value, fixed);
  const std::uint64_t n_base = std::uint64_t{1} << rest.size();
  const std::size_t k = tpos.size();
  const std::size_t dim = std::size_t{1} << k;
  std::vector<std::uint64_t> off(dim);
  for (std::size_t j = 0; j < dim; ++j) off[j] = scatter_value(j, tpos);
  const std::vector<cplx> m = row_major(u);
  cplx* a = amp_.data();
  const std::uint64_t grain = std::max<std::uint64_t>(1, kGrain >> k);
  const std::size_t tasks = static_cast<std::size_t>((n_base + grain - 1) / grain);

  if (is_diagonal(u)) {
    std::vector<cplx> d(dim);
    for (std::size_t j = 0; j < dim; ++j) d[j] = u(j, j);
    parallel_for(tasks, [&](std::size_t t) {
      std::uint64_t lo = t * grain, hi = std::min(n_base, lo + grain);
      for (std::uint64_t r = lo; r < hi; ++r) {
        std::uint64_t base = dep(r) | fmask;
        for (std::size_t j = 0; j < dim; ++j) a[base | off[j]] *= d[j];
      }
    });
    return;
  }
  if (k == 1) {
    const cplx m00 = m[0], m01 = m[1], m10 = m[2], m11 = m[3];
    const std::uint64_t o1 = off[1];
    parallel_for(tasks, [&](std::size_t t) {
      std::uint64_t lo = t * grain, hi = std::min(n_base, lo + grain);
      for (std::uint64_t r = lo; r < hi; ++r) {
        std::uint64_t i0 = dep(r) | fmask, i1 = i0 | o1;
        cplx x = a[i0], y = a[i1];
        a[i0] = m00 * x + m01 * y;
        a[i1] = m10 * x + m11 * y;
      }
    });
    return;
  }
  parallel_for(tasks, [&](std::size_t t) {
    std::vector<cplx> v(dim);
    std::uint64_t lo = t * grain, hi = std::min(n_base, lo + grain);
    for (std::uint64_t r = lo; r < hi; ++r) {
      std::uint64_t base = dep(r) | fmask;
      for (std::size_t j = 0; j < dim; ++j) v[j] = a[base | off[j]];
      for (std::size_t i = 0; i < dim; ++i) {
        cplx s = 0;
        const cplx* row = &m[i * dim];
        for (std::size_t j = 0; j < dim; ++j) s += row[j] * v[j];
        a[base | off[i]] = s;
      }
    }
  });
}

void StateVector::apply(const Matrix& u, std::span<const QubitId> targets, std::span<const Control> controls) {
  if (targets.empty()) throw EngineError("gate without targets");
  auto tpos = positions(targets, "target");
  std::vector<QubitId> cq;
  std::uint64_t cval = 0;
  for (std::size_t k = 0; k < controls.size(); ++k) {
    if (controls[k].value != 0 && controls[k].value != 1) throw EngineError("control value must be 0 or 1");
    cq.push_back(controls[k].qubit);
    cval |= static_cast<std::uint64_t>(controls[k].value) << k;
  }
  auto cpos = positions(cq, "control");
  check_disjoint(tpos, cpos);
  const Eigen::Index dim = Eigen::Index{1} << targets.size();
  if (u.rows() != dim || u.cols() != dim) throw EngineError("gate matrix does not match its target count");
  double res = unitarity_residual(u);
  if (!(res <= kUnitaryTol)) {
    std::ostringstream msg;
    msg << "gate is not unitary (residual " << res << ")";
    throw EngineError(msg.str());
  }
  apply_one(u, tpos, cpos, cval);
}

void StateVector::apply_blocks(std::span<const QubitId> targets, std::span<const QubitId> controls,
                               const std::vector<Matrix>& blocks, bool check_unitary) {
  if (targets.empty()) throw EngineError("gate without targets");
  auto tpos = positions(targets, "target");
  auto cpos = positions(controls, "control");
  check_disjoint(tpos, cpos);
  if (blocks.size() != (std::size_t{1} << controls.size())) throw EngineError("need one block per control value");
  const Eigen::Index dim = Eigen::Index{1} << targets.size();
  for (const auto& b : blocks) {
    if (b.size() == 0) continue;
    if (b.rows() != dim || b.cols() != dim) throw EngineError("block does not match the target count");
    if (check_unitary && !(unitarity_residual(b) <= kUnitaryTol)) throw EngineError("block is not unitary");
  }
  for (std::size_t v = 0; v < blocks.size(); ++v)
    if (blocks[v].size() != 0) apply_one(blocks[v], tpos, cpos, v);
}

void StateVector::validate_event(const GateEvent& ev) const {
  if (ev.kind != GateEvent::Kind::apply) return;
  if (ev.targets.size() > 5) throw EngineError("sequence gates act on at most 5 targets");
  const Eigen::Index dim = Eigen::Index{1} << ev.targets.size();
  if (ev.targets.empty() || ev.u.rows() != dim || ev.u.cols() != dim)
    throw EngineError("gate matrix does not match its target count");
  double res = unitarity_residual(ev.u);
  if (!(res <= kUnitaryTol)) throw EngineError("gate is not unitary");
}

void StateVector::run(const GateSequence& seq) {
  const auto& events = seq.events();
  // Structural validation against a simulated register.
  {
    std::vector<QubitId> reg = reg_;
    auto has = [&](const QubitId& q) { return std::find(reg.begin(), reg.end(), q) != reg.end(); };
    for (std::size_t i = 0; i < events.size(); ++i) {
      const auto& ev = events[i];
      try {
        switch (ev.kind) {
          case GateEvent::Kind::alloc:
            if (has(ev.qubit)) throw EngineError("qubit " + ev.qubit.str() + " already allocated");
            if (static_cast<int>(reg.size()) + 1 > max_qubits_) throw EngineError("register capacity exceeded");
            reg.push_back(ev.qubit);
            break;
          case GateEvent::Kind::free:
            if (!has(ev.qubit)) throw EngineError("qubit " + ev.qubit.str() + " is not registered");
            reg.erase(std::find(reg.begin(), reg.end(), ev.qubit));
            break;
          case GateEvent::Kind::apply: {
            validate_event(ev);
            std::vector<QubitId> wires = ev.targets;
            for (const auto& c : ev.controls) {
              if (c.value != 0 && c.value != 1) throw EngineError("control value must be 0 or 1");
              wires.push_back(c.qubit);
            }
            for (const auto& w : wires)
              if (!has(w)) throw EngineError("qubit " + w.str() + " is not registered");
            std::sort(wires.begin(), wires.end());
            if (std::adjacent_find(wires.begin(), wires.end()) != wires.end())
              throw EngineError("overlapping wires");
            break;
          }
        }
      } catch (const EngineError& e) {
        throw GateSequenceError(i, e.what());
      }
    }
  }
  struct Done {
    GateEvent::Kind kind;
    std::size_t index;
    int pos;
  };
  std::vector<Done> done;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& ev = events[i];
    try {
      switch (ev.kind) {
        case GateEvent::Kind::alloc:
          alloc(ev.qubit);
          done.push_back({ev.kind, i, 0});
          break;
        case GateEvent::Kind::free: {
          int p = position(ev.qubit);
          free(ev.qubit);
          done.push_back({ev.kind, i, p});
          break;
        }
        case GateEvent::Kind::apply:
          apply(ev.u, ev.targets, ev.controls);
          done.push_back({ev.kind, i, 0});
          break;
      }
    } catch (const EngineError& e) {
      for (auto it = done.rbegin(); it != done.rend(); ++it) {
        const auto& past = events[it->index];
        switch (it->kind) {
          case GateEvent::Kind::alloc: {
            int p = position(past.qubit);
            const std::uint64_t low = (std::uint64_t{1} << p) - 1;
            for (std::uint64_t x = 0; x < amp_.size() / 2; ++x) amp_[x] = amp_[((x & ~low) << 1) | (x & low)];
            amp_.resize(amp_.size() / 2);
            reg_.erase(reg_.begin() + p);
            break;
          }
          case GateEvent::Kind::free: insert_qubit(past.qubit, it->pos); break;
          case GateEvent::Kind::apply: apply(past.u.adjoint().eval(), past.targets, past.controls); break;
        }
      }
      throw GateSequenceError(i, e.what());
    }
  }
}

double StateVector::norm() const {
  std::vector<double> part(task_count(amp_.size()), 0.0);
  parallel_for(part.size(), [&](std::size_t t) {
    std::uint64_t lo = t * kGrain, hi = std::min<std::uint64_t>(amp_.size(), lo + kGrain);
    double s = 0;
    for (std::uint64_t i = lo; i < hi; ++i) s += std::norm(amp_[i]);
    part[t] = s;
  });
  return std::sqrt(compensated_sum(part));
}

void StateVector::normalize() {
  double n = norm();
  if (n == 0) throw EngineError("cannot normalize the zero vector");
  for (auto& a : amp_) a /= n;
}

cplx StateVector::inner(const StateVector& other) const {
  auto theirs = other.amplitudes_in_order(reg_);
  std::vector<cplx> part(task_count(amp_.size()));
  parallel_for(part.size(), [&](std::size_t t) {
    std::uint64_t lo = t * kGrain, hi = std::min<std::uint64_t>(amp_.size(), lo + kGrain);
    cplx s = 0;
    for (std::uint64_t i = lo; i < hi; ++i) s += std::conj(amp_[i]) * theirs[i];
    part[t] = s;
  });
  cplx s = 0;
  for (auto x : part) s += x;
  return s;
}

std::vector<double> StateVector::probabilities(std::span<const QubitId> subset) const {
  if (subset.empty()) throw EngineError("empty subset");
  auto spos = positions(subset, "subset");
  auto rest = complement_positions(num_qubits(), spos);
  const Deposit ds(spos), dr(rest);
  const std::uint64_t n_out = std::uint64_t{1} << spos.size();
  const std::uint64_t n_rest = std::uint64_t{1} << rest.size();
  std::vector<double> out(n_out, 0.0);
  if (n_out <= 4096) {
    // Per-task histograms over slices of the rest, combined in task order.
    const std::size_t tasks = task_count(n_rest);
    std::vector<std::vector<double>> hist(tasks);
    parallel_for(tasks, [&](std::size_t t) {
      auto& h = hist[t];
      h.assign(n_out, 0.0);
      std::uint64_t lo = t * kGrain, hi = std::min(n_rest, lo + kGrain);
      for (std::uint64_t r = lo; r < hi; ++r) {
        std::uint64_t base = dr(r);
        for (std::uint64_t o = 0; o < n_out; ++o) h[o] += std::norm(amp_[base | ds(o)]);
      }
    });
    for (const auto& h : hist)
      for (std::uint64_t o = 0; o < n_out; ++o) out[o] += h[o];
  } else {
    parallel_for(task_count(n_out), [&](std::size_t t) {
      std::uint64_t lo = t * kGrain, hi = std::min(n_out, lo + kGrain);
      for (std::uint64_t o = lo; o < hi; ++o) {
        std::uint64_t base = ds(o);
        double s = 0;
        for (std::uint64_t r = 0; r < n_rest; ++r) s += std::norm(amp_[base | dr(r)]);
        out[o] = s;
      }
    });
  }
  return out;
}

Counts StateVector::sample(std::span<const QubitId> subset, std::uint64_t shots, const ReadoutModel* noise) {
  return sample(subset, shots, rng_, noise);
}

Counts StateVector::sample(std::span<const QubitId> subset, std::uint64_t shots, std::mt19937_64& rng,
                           const ReadoutModel* noise) const {
  if (shots < 1) throw EngineError("need at least one shot");
  auto p = probabilities(subset);
  std::vector<double> cum(p.size());
  double run = 0;
  for (std::size_t i = 0; i < p.size(); ++i) cum[i] = (run += p[i]);
  std::vector<std::uint64_t> outcomes(shots);
  for (auto& w : outcomes) {
    double u = uniform01(rng) * run;
    auto it = std::upper_bound(cum.begin(), cum.end(), u);
    w = static_cast<std::uint64_t>(std::min<std::ptrdiff_t>(it - cum.begin(), static_cast<std::ptrdiff_t>(p.size()) - 1));
  }
  Counts c;
  c.qubits.assign(subset.begin(), subset.end());
  if (noise) {
    auto R = noise->response(c.qubits);
    apply_readout_noise(outcomes, R, rng);
  }
  c.counts.assign(p.size(), 0);
  for (auto w : outcomes) ++c.counts[w];
  c.shots = shots;
  return c;
}

DensityMatrix StateVector::partial_trace(std::span<const QubitId> keep, int bound) const {
  if (keep.empty()) throw EngineError("empty subset");
  if (static_cast<int>(keep.size()) > bound)
    throw EngineError("subset of " + std::to_string(keep.size()) + " qubits exceeds the bound of " +
                      std::to_string(bound));
  auto kpos = positions(keep, "subset");
  auto rest = complement_positions(num_qubits(), kpos);
  const Deposit dk(kpos), dr(rest);
  const Eigen::Index K = Eigen::Index{1} << kpos.size();
  const std::uint64_t n_rest = std::uint64_t{1} << rest.size();
  const std::uint64_t block = std::max<std::uint64_t>(1, std::min<std::uint64_t>(n_rest, (std::uint64_t{1} << 20) / K));
  std::vector<std::uint64_t> koff(K);
  for (Eigen::Index i = 0; i < K; ++i) koff[i] = dk(i);
  DensityMatrix rho = DensityMatrix::Zero(K, K);
  Matrix M(K, static_cast<Eigen::Index>(block));
  for (std::uint64_t r0 = 0; r0 < n_rest; r0 += block) {
    std::uint64_t cols = std::min(block, n_rest - r0);
    for (std::uint64_t c = 0; c < cols; ++c) {
      std::uint64_t base = dr(r0 + c);
      for (Eigen::Index i = 0; i < K; ++i) M(i, c) = amp_[base | koff[i]];
    }
    auto Mb = M.leftCols(static_cast<Eigen::Index>(cols));
    rho.noalias() += Mb * Mb.adjoint();
  }
  return rho;
}

namespace {

std::vector<QubitId> smaller_side(const std::vector<QubitId>& reg, std::span<const QubitId> subset) {
  std::vector<QubitId> comp;
  for (const auto& q : reg)
    if (std::find(subset.begin(), subset.end(), q) == subset.end()) comp.push_back(q);
  if (subset.size() <= comp.size()) return {subset.begin(), subset.end()};
  return comp;
}

}  // namespace

double StateVector::renyi2(std::span<const QubitId> subset) const {
  if (subset.empty()) throw EngineError("empty subset");
  positions(subset, "subset");
  auto side = smaller_side(reg_, subset);
  if (side.empty()) return 0.0;
  DensityMatrix rho = partial_trace(side);
  return -std::log(rho.squaredNorm());
}

std::vector<double> StateVector::entanglement_spectrum(std::span<const QubitId> subset) const {
  if (subset.empty()) throw EngineError("empty subset");
  positions(subset, "subset");
  auto side = smaller_side(reg_, subset);
  if (side.empty()) return {1.0};
  DensityMatrix rho = partial_trace(side);
  Eigen::SelfAdjointEigenSolver<DensityMatrix> es(rho, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

double StateVector::von_neumann(std::span<const QubitId> subset) const {
  double s = 0;
  for (double l : entanglement_spectrum(subset))
    if (l > 1e-14) s -= l * std::log(l);
  return s;
}

double StateVector::expectation(const Matrix& op, std::span<const QubitId> subset) const {
  if (subset.empty()) throw EngineError("empty subset");
  const Eigen::Index dim = Eigen::Index{1} << subset.size();
  if (op.rows() != dim || op.cols() != dim) throw EngineError("operator does not match the subset");
  if (hermitian_residual(op) > kHermitianTol) throw EngineError("operator is not Hermitian");
  std::vector<Matrix> blocks{op};
  return expectation_blocks(subset, {}, blocks);
}

double StateVector::expectation_blocks(std::span<const QubitId> targets, std::span<const QubitId> controls,
                                       const std::vector<Matrix>& blocks) const {
  auto tpos = positions(targets, "target");
  auto cpos = positions(controls, "control");
  check_disjoint(tpos, cpos);
  if (blocks.size() != (std::size_t{1} << controls.size())) throw EngineError("need one block per control value");
  const std::size_t dim = std::size_t{1} << tpos.size();
  std::vector<int> used = tpos;
  used.insert(used.end(), cpos.begin(), cpos.end());
  const auto rest = complement_positions(num_qubits(), used);
  const Deposit dep(rest);
  const std::uint64_t n_base = std::uint64_t{1} << rest.size();
  std::vector<std::uint64_t> off(dim);
  for (std::size_t j = 0; j < dim; ++j) off[j] = scatter_value(j, tpos);
  const std::uint64_t grain = std::max<std::uint64_t>(1, kGrain >> tpos.size());
  const std::size_t tasks = static_cast<std::size_t>((n_base + grain - 1) / grain);
  CompensatedSum total;
  for (std::size_t v = 0; v < blocks.size(); ++v) {
    const Matrix& b = blocks[v];
    if (b.size() == 0) continue;
    if (b.rows() != static_cast<Eigen::Index>(dim) || b.cols() != static_cast<Eigen::Index>(dim))
      throw EngineError("block does not match the target count");
    if (hermitian_residual(b) > kHermitianTol) throw EngineError("operator is not Hermitian");
    const std::vector<cplx> m = row_major(b);
    const std::uint64_t fmask = scatter_value(v, cpos);
    std::vector<double> part(tasks, 0.0);
    parallel_for(tasks, [&](std::size_t t) {
      std::vector<cplx> x(dim);
      std::uint64_t lo = t * grain, hi = std::min(n_base, lo + grain);
      double s = 0;
      for (std::uint64_t r = lo; r < hi; ++r) {
        std::uint64_t base = dep(r) | fmask;
        bool any = false;
        for (std::size_t j = 0; j < dim; ++j) {
          x[j] = amp_[base | off[j]];
          any = any || x[j] != cplx(0, 0);
        }
        if (!any) continue;
        for (std::size_t i = 0; i < dim; ++i) {
          if (x[i] == cplx(0, 0)) continue;
          cplx y = 0;
          const cplx* row = &m[i * dim];
          for (std::size_t j = 0; j < dim; ++j) y += row[j] * x[j];
          s += (std::conj(x[i]) * y).real();
        }
      }
      part[t] = s;
    });
    for (double p : part) total.add(p);
  }
  return total.value();
}

double StateVector::expectation_diagonal(std::span<const QubitId> subset, const std::vector<double>& diag) const {
  auto p = probabilities(subset);
  if (diag.size() != p.size()) throw EngineError("diagonal does not match the subset");
  CompensatedSum s;
  for (std::size_t i = 0; i < p.size(); ++i) s.add(p[i] * diag[i]);
  return s.value();
}

// ---------------------------------------------------------------- snapshots

namespace {
constexpr char kMagic[8] = {'F', 'I', 'B', 'S', 'N', 'A', 'P', '1'};
constexpr std::uint32_t kEndianTag = 0x01020304u;
}  // namespace

void StateVector::save_snapshot(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw EngineError("cannot write snapshot " + path);
  out.write(kMagic, 8);
  std::uint32_t tag = kEndianTag, n = static_cast<std::uint32_t>(reg_.size());
  out.write(reinterpret_cast<const char*>(&tag), 4);
  out.write(reinterpret_cast<const char*>(&n), 4);
  for (const auto& q : reg_) {
    std::int32_t rc[2] = {q.row, q.col};
    out.write(reinterpret_cast<const char*>(rc), 8);
  }
  out.write(reinterpret_cast<const char*>(amp_.data()), static_cast<std::streamsize>(amp_.size() * sizeof(cplx)));
  if (!out) throw EngineError("failed writing snapshot " + path);
}

StateVector StateVector::load_snapshot(const std::string& path, int max_qubits) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw EngineError("cannot read snapshot " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0) throw EngineError("not a state snapshot: " + path);
  std::uint32_t tag = 0, n = 0;
  in.read(reinterpret_cast<char*>(&tag), 4);
  in.read(reinterpret_cast<char*>(&n), 4);
  if (tag != kEndianTag) throw EngineError("snapshot endianness does not match this host");
  if (static_cast<int>(n) > max_qubits) throw EngineError("snapshot exceeds register capacity");
  StateVector sv(max_qubits);
  for (std::uint32_t i = 0; i < n; ++i) {
    std::int32_t rc[2];
    in.read(reinterpret_cast<char*>(rc), 8);
    sv.reg_.push_back({rc[0], rc[1]});
  }
  sv.amp_.assign(std::size_t{1} << n, cplx(0, 0));
  in.read(reinterpret_cast<char*>(sv.amp_.data()), static_cast<std::streamsize>(sv.amp_.size() * sizeof(cplx)));
  if (!in) throw EngineError("truncated snapshot " + path);
  return sv;
}

}  // namespace fibstring
