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

#include "fibstring/lattice.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace fibstring {

std::string QubitId::str() const {
  return "Q(" + std::to_string(row) + "," + std::to_string(col) + ")";
}

QubitId QubitId::parse(std::string_view text) {
  std::string s(text);
  s.erase(std::remove_if(s.begin(), s.end(), [](char c) { return c == ' '; }), s.end());
  if (s.size() >= 3 && (s[0] == 'Q' || s[0] == 'q') && s[1] == '(' && s.back() == ')') {
    s = s.substr(2, s.size() - 3);
  }
  auto comma = s.find(',');
  if (comma == std::string::npos) throw std::invalid_argument("bad qubit label '" + std::string(text) + "'");
  try {
    size_t p1 = 0, p2 = 0;
    int r = std::stoi(s.substr(0, comma), &p1);
    int c = std::stoi(s.substr(comma + 1), &p2);
    if (p1 != comma || p2 != s.size() - comma - 1) throw std::invalid_argument("trailing");
    return {r, c};
  } catch (const std::exception&) {
    throw std::invalid_argument("bad qubit label '" + std::string(text) + "'");
  }
}

Preset parse_preset(std::string_view name) {
  if (name == "single_plaquette" || name == "single") return Preset::single_plaquette;
  if (name == "two_plaquette" || name == "two") return Preset::two_plaquette;
  if (name == "three_plaquette_fig1b" || name == "three") return Preset::three_plaquette_fig1b;
  throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
}

std::string to_string(Preset preset) {
  switch (preset) {
    case Preset::single_plaquette: return "single_plaquette";
    case Preset::two_plaquette: return "two_plaquette";
    case Preset::three_plaquette_fig1b: return "three_plaquette_fig1b";
  }
  return "unknown";
}

std::vector<QubitId> PartitionScheme::all() const {
  std::vector<QubitId> out = A;
  out.insert(out.end(), B.begin(), B.end());
  out.insert(out.end(), C.begin(), C.end());
  std::sort(out.begin(), out.end());
  return out;
}

int LatticeLayout::index_of(const QubitId& q) const {
  auto it = std::lower_bound(qubits.begin(), qubits.end(), q);
  if (it == qubits.end() || *it != q) return -1;
  return static_cast<int>(it - qubits.begin());
}

bool LatticeLayout::is_edge(const QubitId& q) const {
  return std::find(edges.begin(), edges.end(), q) != edges.end();
}

std::vector<QubitId> LatticeLayout::inner_edges() const {
  std::set<QubitId> s;
  for (const auto& p : plaquettes) s.insert(p.inner.begin(), p.inner.end());
  return {s.begin(), s.end()};
}

std::vector<QubitId> LatticeLayout::leg_edges() const {
  auto inner = inner_edges();
  std::vector<QubitId> out;
  for (const auto& e : edges)
    if (!std::binary_search(inner.begin(), inner.end(), e)) out.push_back(e);
  return out;
}

int LatticeLayout::vertex_between(const QubitId& e1, const QubitId& e2) const {
  for (size_t v = 0; v < vertices.size(); ++v) {
    const auto& es = vertices[v].edges;
    if (std::find(es.begin(), es.end(), e1) != es.end() && std::find(es.begin(), es.end(), e2) != es.end())
      return static_cast<int>(v);
  }
  return -1;
}

void LatticeLayout::validate() const {
  std::set<QubitId> all(qubits.begin(), qubits.end());
  if (all.size() != qubits.size()) throw std::logic_error("duplicate qubit in layout");
  if (!std::is_sorted(qubits.begin(), qubits.end())) throw std::logic_error("qubits not in row-major order");
  for (const auto& e : edges) {
    if (!all.count(e)) throw std::logic_error("edge " + e.str() + " not in qubit list");
    if (std::find(free_ancillas.begin(), free_ancillas.end(), e) != free_ancillas.end())
      throw std::logic_error("edge " + e.str() + " listed as ancilla");
  }
  for (const auto& a : free_ancillas)
    if (!all.count(a)) throw std::logic_error("ancilla " + a.str() + " not in qubit list");
  if (edges.size() + free_ancillas.size() != qubits.size())
    throw std::logic_error("qubits are neither edges nor ancillas");

  std::map<QubitId, int> degree;
  for (const auto& v : vertices) {
    if (v.edges.size() < 2 || v.edges.size() > 3)
      throw std::logic_error("vertex with degree " + std::to_string(v.edges.size()));
    std::set<QubitId> distinct(v.edges.begin(), v.edges.end());
    if (distinct.size() != v.edges.size()) throw std::logic_error("vertex repeats an edge");
    for (const auto& e : v.edges) {
      if (!is_edge(e)) throw std::logic_error("vertex uses non-edge " + e.str());
      ++degree[e];
    }
  }
  for (const auto& [e, d] : degree)
    if (d > 2) throw std::logic_error("edge " + e.str() + " has more than two endpoints");

  std::map<QubitId, int> incidence;
  for (const auto& p : plaquettes) {
    std::set<QubitId> inner(p.inner.begin(), p.inner.end());
    if (inner.size() != 6) throw std::logic_error("plaquette " + p.name + " repeats an inner edge");
    for (const auto& e : p.inner) {
      if (!is_edge(e)) throw std::logic_error("plaquette " + p.name + " uses non-edge " + e.str());
      ++incidence[e];
    }
    for (int k = 0; k < 6; ++k) {
      const QubitId& x = p.inner[k];
      const QubitId& y = p.inner[(k + 1) % 6];
      int v = vertex_between(x, y);
      if (v < 0) throw std::logic_error("plaquette " + p.name + ": inner edges not adjacent");
      const auto& es = vertices[v].edges;
      if (p.outer[k]) {
        if (es.size() != 3 || std::find(es.begin(), es.end(), *p.outer[k]) == es.end())
          throw std::logic_error("plaquette " + p.name + ": outer edge out of order");
      } else if (es.size() != 2) {
        throw std::logic_error("plaquette " + p.name + ": missing outer edge");
      }
    }
  }
  for (const auto& [e, n] : incidence)
    if (n > 2) throw std::logic_error("edge " + e.str() + " borders more than two plaquettes");
  for (const auto& t : tails) {
    if (t.vertex < 0 || t.vertex >= static_cast<int>(vertices.size())) throw std::logic_error("tail vertex out of range");
    if (!is_edge(t.host)) throw std::logic_error("tail host is not an edge");
  }
}

namespace {

QubitId Q(int r, int c) { return {r, c}; }

void finish(LatticeLayout& L) {
  std::vector<QubitId> all = L.edges;
  all.insert(all.end(), L.free_ancillas.begin(), L.free_ancillas.end());
  std::sort(all.begin(), all.end());
  L.qubits = all;
  std::sort(L.edges.begin(), L.edges.end());
  std::sort(L.free_ancillas.begin(), L.free_ancillas.end());
  L.validate();
}

LatticeLayout single_plaquette() {
  LatticeLayout L;
  L.preset = Preset::single_plaquette;
  std::array<QubitId, 6> in{Q(3, 5), Q(3, 7), Q(5, 9), Q(7, 7), Q(7, 5), Q(5, 3)};
  std::array<QubitId, 6> out{Q(1, 7), Q(3, 9), Q(7, 9), Q(9, 5), Q(7, 3), Q(3, 3)};
  PlaquetteSpec p{"P", in, {}};
  for (int k = 0; k < 6; ++k) {
    p.outer[k] = out[k];
    L.vertices.push_back({{in[k], in[(k + 1) % 6], out[k]}});
    L.edges.push_back(in[k]);
    L.edges.push_back(out[k]);
  }
  L.plaquettes.push_back(p);
  finish(L);
  return L;
}

LatticeLayout two_plaquette() {
  LatticeLayout L;
  L.preset = Preset::two_plaquette;
  QubitId s = Q(5, 7);
  std::array<QubitId, 5> a{Q(7, 7), Q(7, 5), Q(5, 3), Q(3, 5), Q(3, 7)};
  std::array<QubitId, 5> b{Q(3, 9), Q(3, 11), Q(5, 13), Q(7, 11), Q(7, 9)};
  std::array<QubitId, 4> la{Q(9, 7), Q(7, 3), Q(3, 3), Q(1, 7)};
  std::array<QubitId, 4> lb{Q(1, 11), Q(3, 13), Q(7, 13), Q(9, 11)};
  L.vertices.push_back({{s, a[0], b[4]}});
  L.vertices.push_back({{s, a[4], b[0]}});
  for (int k = 0; k < 4; ++k) {
    L.vertices.push_back({{a[k], a[k + 1], la[k]}});
    L.vertices.push_back({{b[k], b[k + 1], lb[k]}});
  }
  PlaquetteSpec pa{"A", {s, a[0], a[1], a[2], a[3], a[4]}, {b[4], la[0], la[1], la[2], la[3], b[0]}};
  PlaquetteSpec pb{"B", {s, b[0], b[1], b[2], b[3], b[4]}, {a[4], lb[0], lb[1], lb[2], lb[3], a[0]}};
  L.plaquettes = {pa, pb};
  L.edges.push_back(s);
  L.edges.insert(L.edges.end(), a.begin(), a.end());
  L.edges.insert(L.edges.end(), b.begin(), b.end());
  L.edges.insert(L.edges.end(), la.begin(), la.end());
  L.edges.insert(L.edges.end(), lb.begin(), lb.end());
  finish(L);
  return L;
}

// Three hexagons A, B, C around a central vertex joining the shared edges
// i1 (A|B), i2 (B|C), i3 (C|A). Each hexagon sits around one interior qubit,
// which doubles as the boundary-copy target of one shared edge.
LatticeLayout three_plaquette() {
  LatticeLayout L;
  L.preset = Preset::three_plaquette_fig1b;
  QubitId i1 = Q(7, 11), i2 = Q(7, 13), i3 = Q(5, 11);
  std::array<QubitId, 4> a{Q(7, 9), Q(7, 7), Q(5, 7), Q(3, 9)};
  std::array<QubitId, 4> b{Q(9, 15), Q(11, 13), Q(11, 11), Q(9, 11)};
  std::array<QubitId, 4> c{Q(3, 11), Q(3, 13), Q(3, 15), Q(5, 15)};
  QubitId la12 = Q(9, 7), la23 = Q(5, 5), la34 = Q(3, 7);
  QubitId lb12 = Q(11, 15), lb34 = Q(11, 9);
  QubitId lc12 = Q(1, 13), lc34 = Q(5, 17);

  L.vertices = {
      {{i1, i2, i3}},          // 0: center
      {{i1, a[0], b[3]}},      // 1: A|B outer end
      {{i2, b[0], c[3]}},      // 2: B|C outer end
      {{i3, c[0], a[3]}},      // 3: C|A outer end
      {{a[0], a[1], la12}}, {{a[1], a[2], la23}}, {{a[2], a[3], la34}},
      {{b[0], b[1], lb12}}, {{b[1], b[2]}},       {{b[2], b[3], lb34}},
      {{c[0], c[1], lc12}}, {{c[1], c[2]}},       {{c[2], c[3], lc34}},
  };
  L.center_vertex = 0;
  L.plaquettes = {
      {"A", {i1, a[0], a[1], a[2], a[3], i3}, {b[3], la12, la23, la34, c[0], i2}},
      {"B", {i2, b[0], b[1], b[2], b[3], i1}, {c[3], lb12, std::nullopt, lb34, a[0], i3}},
      {"C", {i3, c[0], c[1], c[2], c[3], i2}, {a[3], lc12, std::nullopt, lc34, b[0], i1}},
  };
  L.edges = {i1, i2, i3, la12, la23, la34, lb12, lb34, lc12, lc34};
  for (int k = 0; k < 4; ++k) {
    L.edges.push_back(a[k]);
    L.edges.push_back(b[k]);
    L.edges.push_back(c[k]);
  }
  L.free_ancillas = {Q(9, 13), Q(5, 13), Q(5, 9), Q(7, 15), Q(9, 9)};
  // Both pairs live inside C, on i2 and i3 next to the center.
  L.tails = {{0, i2, Q(5, 13), Q(7, 15)}, {0, i3, Q(5, 9), Q(9, 9)}};
  finish(L);
  return L;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

// Region qubits adjacent to each layout vertex after boundary copying.
std::vector<std::vector<QubitId>> region_vertex_sets(const LatticeLayout& L) {
  auto copies = boundary_copy_map(L);
  auto region = tee_region(L);
  std::vector<std::vector<QubitId>> out(L.vertices.size());
  for (size_t v = 0; v < L.vertices.size(); ++v) {
    for (const auto& e : L.vertices[v].edges) {
      QubitId half = e;
      for (const auto& cp : copies)
        if (cp.source == e && cp.vertex == static_cast<int>(v)) half = cp.target;
      if (std::binary_search(region.begin(), region.end(), half)) out[v].push_back(half);
    }
  }
  return out;
}

}  // namespace

LatticeLayout build_layout(Preset preset) {
  switch (preset) {
    case Preset::single_plaquette: return single_plaquette();
    case Preset::two_plaquette: return two_plaquette();
    case Preset::three_plaquette_fig1b: return three_plaquette();
  }
  throw std::invalid_argument("unknown preset");
}

std::vector<CopyPair> boundary_copy_map(const LatticeLayout& L) {
  if (L.preset != Preset::three_plaquette_fig1b)
    throw std::invalid_argument("boundary copies need the three-plaquette layout");
  return {{Q(7, 11), Q(9, 13), 1}, {Q(7, 13), Q(5, 13), 2}, {Q(5, 11), Q(5, 9), 3}};
}

std::vector<QubitId> tee_region(const LatticeLayout& L) {
  auto out = L.inner_edges();
  for (const auto& cp : boundary_copy_map(L)) out.push_back(cp.target);
  std::sort(out.begin(), out.end());
  return out;
}

RegionGeometry region_geometry(const LatticeLayout& L, const std::vector<QubitId>& region) {
  auto all = tee_region(L);
  auto sets = region_vertex_sets(L);
  auto pos = [&](const QubitId& q) {
    auto it = std::lower_bound(all.begin(), all.end(), q);
    if (it == all.end() || *it != q) throw std::invalid_argument(q.str() + " outside the TEE region");
    return static_cast<int>(it - all.begin());
  };
  std::vector<char> inside(all.size(), 0);
  for (const auto& q : region) inside[pos(q)] = 1;

  UnionFind strings(all.size()), touch(all.size());
  for (const auto& cp : boundary_copy_map(L)) {
    strings.unite(pos(cp.source), pos(cp.target));
    touch.unite(pos(cp.source), pos(cp.target));
  }
  for (const auto& s : sets) {
    if (s.size() == 2) strings.unite(pos(s[0]), pos(s[1]));
    for (size_t k = 1; k < s.size(); ++k) touch.unite(pos(s[0]), pos(s[k]));
  }

  std::map<int, std::pair<bool, bool>> seen;
  for (size_t q = 0; q < all.size(); ++q) {
    auto& entry = seen[strings.find(static_cast<int>(q))];
    (inside[q] ? entry.first : entry.second) = true;
  }
  RegionGeometry g;
  for (const auto& [_, e] : seen)
    if (e.first && e.second) ++g.n;

  // Components of the complement, using adjacency restricted to it.
  UnionFind comp(all.size());
  for (const auto& cp : boundary_copy_map(L)) {
    int x = pos(cp.source), y = pos(cp.target);
    if (!inside[x] && !inside[y]) comp.unite(x, y);
  }
  for (const auto& s : sets)
    for (size_t k = 0; k < s.size(); ++k)
      for (size_t m = k + 1; m < s.size(); ++m) {
        int x = pos(s[k]), y = pos(s[m]);
        if (!inside[x] && !inside[y]) comp.unite(x, y);
      }
  std::set<int> roots;
  for (size_t q = 0; q < all.size(); ++q)
    if (!inside[q]) roots.insert(comp.find(static_cast<int>(q)));
  g.j = static_cast<int>(roots.size());
  return g;
}

std::vector<PartitionScheme> tee_partition_schemes(const LatticeLayout& L) {
  if (L.preset != Preset::three_plaquette_fig1b || L.center_vertex < 0)
    throw std::invalid_argument("partition schemes need the three-plaquette layout");
  auto sets = region_vertex_sets(L);
  std::vector<PartitionScheme> out;
  for (size_t p = 0; p < L.plaquettes.size(); ++p) {
    const auto& spec = L.plaquettes[p];
    // Units around the hexagon: trivalent clusters and loose loop qubits.
    std::vector<std::vector<QubitId>> units;
    std::set<QubitId> clustered;
    std::vector<int> verts;
    for (int k = 0; k < 6; ++k) {
      int v = L.vertex_between(spec.inner[k], spec.inner[(k + 1) % 6]);
      verts.push_back(v);
      if (sets[v].size() == 3) clustered.insert(sets[v].begin(), sets[v].end());
    }
    int start = -1;
    for (int k = 0; k < 6; ++k) {
      int v = verts[k];
      if (sets[v].size() == 3) {
        if (v == L.center_vertex) start = static_cast<int>(units.size());
        units.push_back(sets[v]);
      }
      const QubitId& next = spec.inner[(k + 1) % 6];
      if (!clustered.count(next)) units.push_back({next});
    }
    if (start < 0) throw std::logic_error("plaquette does not touch the center");
    std::rotate(units.begin(), units.begin() + start, units.end());
    // units = [center, S_next, free..., S_prev]
    int n_free = static_cast<int>(units.size()) - 3;
    for (int d = 0; d <= n_free; ++d) {
      PartitionScheme s;
      s.orientation = static_cast<int>(p);
      s.division = d;
      s.A = units[0];
      for (int u = 1; u < static_cast<int>(units.size()); ++u) {
        auto& dst = u <= 1 + d ? s.B : s.C;
        dst.insert(dst.end(), units[u].begin(), units[u].end());
      }
      std::sort(s.A.begin(), s.A.end());
      std::sort(s.B.begin(), s.B.end());
      std::sort(s.C.begin(), s.C.end());
      out.push_back(std::move(s));
    }
  }
  return out;
}

std::string layout_to_json(const LatticeLayout& L) {
  using nlohmann::json;
  auto qs = [](const std::vector<QubitId>& v) {
    json a = json::array();
    for (const auto& q : v) a.push_back(q.str());
    return a;
  };
  json j;
  j["preset"] = to_string(L.preset);
  auto legs = L.leg_edges();
  auto inner = L.inner_edges();
  json qubits = json::array();
  for (size_t i = 0; i < L.qubits.size(); ++i) {
    const auto& q = L.qubits[i];
    std::string role = "ancilla";
    if (std::binary_search(inner.begin(), inner.end(), q)) role = "inner_edge";
    else if (L.is_edge(q)) role = "leg_edge";
    qubits.push_back({{"label", q.str()}, {"row", q.row}, {"col", q.col}, {"index", i}, {"role", role}});
  }
  j["qubits"] = qubits;
  j["edges"] = qs(L.edges);
  j["free_ancillas"] = qs(L.free_ancillas);
  json verts = json::array();
  for (const auto& v : L.vertices) verts.push_back(qs(v.edges));
  j["vertices"] = verts;
  json plaqs = json::array();
  for (const auto& p : L.plaquettes) {
    json outer = json::array();
    for (const auto& o : p.outer) outer.push_back(o ? json(o->str()) : json(nullptr));
    plaqs.push_back({{"name", p.name},
                     {"inner", qs({p.inner.begin(), p.inner.end()})},
                     {"outer", outer}});
  }
  j["plaquettes"] = plaqs;
  json tails = json::array();
  for (const auto& t : L.tails)
    tails.push_back({{"vertex", t.vertex}, {"host", t.host.str()}, {"fusion", t.fusion.str()}, {"copy", t.copy.str()}});
  j["tails"] = tails;
  if (L.preset == Preset::three_plaquette_fig1b) {
    json copies = json::array();
    for (const auto& cp : boundary_copy_map(L))
      copies.push_back({{"source", cp.source.str()}, {"target", cp.target.str()}, {"vertex", cp.vertex}});
    j["boundary_copies"] = copies;
    json schemes = json::array();
    for (const auto& s : tee_partition_schemes(L))
      schemes.push_back({{"orientation", s.orientation}, {"division", s.division},
                         {"A", qs(s.A)}, {"B", qs(s.B)}, {"C", qs(s.C)}});
    j["partition_schemes"] = schemes;
  }
  return j.dump(2);
}

}  // namespace fibstring
