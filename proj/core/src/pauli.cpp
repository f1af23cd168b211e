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
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "fibstring/parallel.hpp"
#include "fibstring/stringnet.hpp"

namespace fibstring {
namespace {

constexpr char kLetters[] = "IXYZ";

// Tr(P^dagger M) for every inner Pauli word P. Entry (r, c) of M sits at
// digit k = 2 r_k + c_k of a base-4 index; each digit is then mapped to the
// Pauli letters I, X, Y, Z.
std::vector<cplx> inner_traces(const Matrix& m, int n) {
  const std::size_t dim = std::size_t{1} << n;
  std::vector<cplx> t(std::size_t{1} << (2 * n));
  for (std::size_t r = 0; r < dim; ++r) {
    for (std::size_t c = 0; c < dim; ++c) {
      std::size_t idx = 0;
      for (int k = 0; k < n; ++k) idx |= (((r >> k) & 1) << 1 | ((c >> k) & 1)) << (2 * k);
      t[idx] = m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }
  }
  const cplx i(0, 1);
  for (int k = 0; k < n; ++k) {
    const std::size_t stride = std::size_t{1} << (2 * k);
    for (std::size_t base = 0; base < t.size(); ++base) {
      if ((base >> (2 * k)) & 3) continue;
      const cplx m00 = t[base], m01 = t[base + stride], m10 = t[base + 2 * stride], m11 = t[base + 3 * stride];
      t[base] = m00 + m11;
      t[base + stride] = m01 + m10;
      t[base + 2 * stride] = i * (m01 - m10);
      t[base + 3 * stride] = m00 - m11;
    }
  }
  return t;
}

std::string word_of(std::size_t p, std::size_t z, int n_inner, int n_ctrl) {
  std::string w(static_cast<std::size_t>(n_inner + n_ctrl), 'I');
  for (int k = 0; k < n_inner; ++k) w[k] = kLetters[(p >> (2 * k)) & 3];
  for (int k = 0; k < n_ctrl; ++k)
    if ((z >> k) & 1) w[n_inner + k] = 'Z';
  return w;
}

int letter_code(char c) {
  switch (c) {
    case 'I': return 0;
    case 'X': return 1;
    case 'Y': return 2;
    case 'Z': return 3;
    default: throw std::invalid_argument(std::string("bad Pauli letter '") + c + "'");
  }
}

// Two bits per qubit; the support mask has both bits set on non-identity qubits.
struct Packed {
  std::uint64_t letters = 0;
  std::uint64_t support = 0;
};

Packed pack(const std::string& w) {
  if (w.size() > 32) throw std::invalid_argument("Pauli word longer than 32 qubits");
  Packed p;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const std::uint64_t c = static_cast<std::uint64_t>(letter_code(w[k]));
    p.letters |= c << (2 * k);
    if (c) p.support |= std::uint64_t{3} << (2 * k);
  }
  return p;
}

}  // namespace

PauliTermSet pauli_decompose(const PlaquetteOperator& op, double threshold) {
  const int ni = static_cast<int>(op.inner.size());
  const int nc = static_cast<int>(op.controls.size());
  if (ni + nc > 16) throw std::invalid_argument("operator too large for a Pauli expansion");
  if (op.blocks.size() != (std::size_t{1} << nc)) throw std::invalid_argument("one block per control value");
  const std::size_t n_words = std::size_t{1} << (2 * ni);
  // traces[o][p], then a Walsh transform over o turns control values into
  // I/Z words on the controls.
  std::vector<std::vector<cplx>> tr;
  for (const auto& b : op.blocks) tr.push_back(inner_traces(b, ni));
  for (int k = 0; k < nc; ++k) {
    const std::size_t bit = std::size_t{1} << k;
    for (std::size_t o = 0; o < tr.size(); ++o) {
      if (o & bit) continue;
      for (std::size_t p = 0; p < n_words; ++p) {
        const cplx a = tr[o][p], b = tr[o | bit][p];
        tr[o][p] = a + b;
        tr[o | bit][p] = a - b;
      }
    }
  }
  PauliTermSet out;
  out.n_qubits = ni + nc;
  const double norm = std::ldexp(1.0, -(ni + nc));
  for (std::size_t z = 0; z < tr.size(); ++z) {
    for (std::size_t p = 0; p < n_words; ++p) {
      const cplx c = tr[z][p] * norm;
      if (std::abs(c) <= threshold) continue;
      if (std::abs(c.imag()) > 1e-9) throw std::domain_error("operator is not Hermitian");
      out.terms.push_back({word_of(p, z, ni, nc), c.real()});
    }
  }
  return out;
}

PauliTermSet pauli_decompose(const Matrix& m, double threshold) {
  if (m.rows() != m.cols() || m.rows() == 0 || (m.rows() & (m.rows() - 1)))
    throw std::invalid_argument("matrix must be square with a power-of-two dimension");
  PlaquetteOperator op;
  int n = 0;
  while ((Eigen::Index{1} << n) < m.rows()) ++n;
  for (int k = 0; k < n; ++k) op.inner.push_back(QubitId{0, k});
  op.blocks.push_back(m);
  return pauli_decompose(op, threshold);
}

BasisGroups group_bases(const PauliTermSet& terms) {
  const std::size_t n = terms.terms.size();
  // Quantized magnitudes keep the order stable against rounding noise.
  std::vector<long long> key(n);
  for (std::size_t i = 0; i < n; ++i) key[i] = std::llround(std::abs(terms.terms[i].coeff) * 1e12);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key[a] > key[b]; });

  BasisGroups g;
  g.assignment.assign(n, -1);
  std::vector<Packed> groups;
  for (std::size_t i : order) {
    const Packed t = pack(terms.terms[i].word);
    int hit = -1;
    for (std::size_t k = 0; k < groups.size(); ++k) {
      const std::uint64_t both = groups[k].support & t.support;
      if (((groups[k].letters ^ t.letters) & both) == 0) {
        hit = static_cast<int>(k);
        break;
      }
    }
    if (hit < 0) {
      hit = static_cast<int>(groups.size());
      groups.push_back({});
    }
    groups[hit].letters |= t.letters & t.support;
    groups[hit].support |= t.support;
    g.assignment[i] = hit;
  }
  for (const auto& p : groups) {
    std::string w(static_cast<std::size_t>(terms.n_qubits), 'I');
    for (int k = 0; k < terms.n_qubits; ++k) w[k] = kLetters[(p.letters >> (2 * k)) & 3];
    g.bases.push_back(std::move(w));
  }
  return g;
}

std::vector<Matrix> reconstruct_blocks(const PauliTermSet& terms, const PlaquetteOperator& like) {
  const int ni = static_cast<int>(like.inner.size());
  const int nc = static_cast<int>(like.controls.size());
  if (terms.n_qubits != ni + nc) throw std::invalid_argument("term set does not match the operator shape");
  const std::size_t dim = std::size_t{1} << ni;
  std::vector<Matrix> blocks(std::size_t{1} << nc,
                             Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)));
  const cplx i(0, 1);
  std::vector<cplx> col_phase(dim);
  for (const auto& t : terms.terms) {
    std::size_t xmask = 0, zctrl = 0;
    for (int k = 0; k < ni; ++k) {
      const char c = t.word[k];
      if (c == 'X' || c == 'Y') xmask |= std::size_t{1} << k;
    }
    for (int k = 0; k < nc; ++k) {
      const char c = t.word[ni + k];
      if (c == 'Z') zctrl |= std::size_t{1} << k;
      else if (c != 'I') throw std::invalid_argument("control qubits carry only I or Z");
    }
    for (std::size_t j = 0; j < dim; ++j) {
      cplx ph = 1.0;
      for (int k = 0; k < ni; ++k) {
        const int b = (j >> k) & 1;
        switch (t.word[k]) {
          case 'Y': ph *= b ? -i : i; break;
          case 'Z': if (b) ph = -ph; break;
          default: break;
        }
      }
      col_phase[j] = ph * t.coeff;
    }
    for (std::size_t o = 0; o < blocks.size(); ++o) {
      const double sign = (std::popcount(o & zctrl) & 1) ? -1.0 : 1.0;
      Matrix& b = blocks[o];
      for (std::size_t j = 0; j < dim; ++j)
        b(static_cast<Eigen::Index>(j ^ xmask), static_cast<Eigen::Index>(j)) += sign * col_phase[j];
    }
  }
  return blocks;
}

std::vector<QubitId> word_qubits(const PlaquetteOperator& op) {
  auto qs = op.inner;
  qs.insert(qs.end(), op.controls.begin(), op.controls.end());
  return qs;
}

double sampled_pauli_expectation(StateVector& sv, const PauliTermSet& terms, const BasisGroups& groups,
                                 const std::vector<QubitId>& qubits, std::uint64_t shots, std::mt19937_64& rng,
                                 const ReadoutModel* noise) {
  if (static_cast<int>(qubits.size()) != terms.n_qubits) throw std::invalid_argument("one qubit per word position");
  if (groups.assignment.size() != terms.terms.size()) throw std::invalid_argument("groups do not match the terms");
  if (shots == 0) throw std::invalid_argument("shots must be positive");
  const double r = 1.0 / std::sqrt(2.0);
  Matrix h(2, 2), sdg_h(2, 2);
  h << r, r, r, -r;
  // Maps the Y eigenbasis onto Z: H S^dagger.
  sdg_h << r, cplx(0, -r), r, cplx(0, r);
  std::vector<std::vector<std::size_t>> members(groups.bases.size());
  for (std::size_t t = 0; t < terms.terms.size(); ++t) members[groups.assignment[t]].push_back(t);
  CompensatedSum total;
  for (std::size_t g = 0; g < groups.bases.size(); ++g) {
    const std::string& basis = groups.bases[g];
    std::vector<QubitId> measured;
    std::vector<int> slot(basis.size(), -1);
    for (std::size_t k = 0; k < basis.size(); ++k) {
      if (basis[k] == 'I') continue;
      slot[k] = static_cast<int>(measured.size());
      measured.push_back(qubits[k]);
    }
    if (measured.empty()) {
      for (std::size_t t : members[g]) total.add(terms.terms[t].coeff);
      continue;
    }
    auto rotate = [&](bool undo) {
      for (std::size_t k = 0; k < basis.size(); ++k) {
        const QubitId q[] = {qubits[k]};
        if (basis[k] == 'X') sv.apply(h, q);
        if (basis[k] == 'Y') sv.apply(undo ? Matrix(sdg_h.adjoint()) : sdg_h, q);
      }
    };
    rotate(false);
    const Counts c = sv.sample(measured, shots, rng, noise);
    rotate(true);
    for (std::size_t t : members[g]) {
      std::size_t mask = 0;
      for (std::size_t k = 0; k < basis.size(); ++k)
        if (terms.terms[t].word[k] != 'I') mask |= std::size_t{1} << slot[k];
      double acc = 0;
      for (std::size_t o = 0; o < c.counts.size(); ++o)
        if (c.counts[o]) acc += (std::popcount(o & mask) & 1 ? -1.0 : 1.0) * static_cast<double>(c.counts[o]);
      total.add(terms.terms[t].coeff * acc / static_cast<double>(shots));
    }
  }
  return total.value();
}

}  // namespace fibstring
