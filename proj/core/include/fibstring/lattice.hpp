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
#include <string>
#include <string_view>
#include <vector>

#include "fibstring/qubit.hpp"

namespace fibstring {

enum class Preset { single_plaquette, two_plaquette, three_plaquette_fig1b };

Preset parse_preset(std::string_view name);
std::string to_string(Preset preset);

/// Edges meeting at a vertex; two (bivalent) or three (trivalent).
struct Vertex {
  std::vector<QubitId> edges;
};

/// Hexagon in the index order a..f (inner) and g..l (outer). outer[k] meets the
/// hexagon at the vertex between inner[k] and inner[(k+1) % 6]; an empty entry
/// marks a bivalent vertex, which behaves as a vacuum leg.
struct PlaquetteSpec {
  std::string name;
  std::array<QubitId, 6> inner;
  std::array<std::optional<QubitId>, 6> outer;
};

/// Attachment point for an anyon pair used by the braiding experiment.
/// The pair sits on `host` next to `vertex`; `fusion` holds the connecting
/// segment (and later the pair's fusion channel), `copy` the split-off part of
/// the host edge adjacent to the vertex.
struct TailSite {
  int vertex = -1;
  QubitId host;
  QubitId fusion;
  QubitId copy;
};

/// Boundary copy: `target` becomes the half of the shared edge `source` that
/// touches `vertex`.
struct CopyPair {
  QubitId source;
  QubitId target;
  int vertex = -1;
};

struct PartitionScheme {
  std::vector<QubitId> A, B, C;
  int orientation = 0;
  int division = 0;

  std::vector<QubitId> all() const;
};

struct LatticeLayout {
  Preset preset = Preset::single_plaquette;
  /// Every qubit of the layout in dense (row-major) order.
  std::vector<QubitId> qubits;
  std::vector<QubitId> edges;
  std::vector<QubitId> free_ancillas;
  std::vector<Vertex> vertices;
  std::vector<PlaquetteSpec> plaquettes;
  std::vector<TailSite> tails;
  /// Vertex shared by all plaquettes, or -1.
  int center_vertex = -1;

  int index_of(const QubitId& q) const;
  bool is_edge(const QubitId& q) const;
  /// Union of all plaquette inner edges, sorted.
  std::vector<QubitId> inner_edges() const;
  /// Edges that are not inner edges of any plaquette.
  std::vector<QubitId> leg_edges() const;
  /// Index of the vertex holding both edges, or -1.
  int vertex_between(const QubitId& e1, const QubitId& e2) const;
  /// Throws std::logic_error describing the first violated invariant.
  void validate() const;
};

LatticeLayout build_layout(Preset preset);

/// Three-plaquette layout only; throws std::invalid_argument otherwise.
std::vector<CopyPair> boundary_copy_map(const LatticeLayout& layout);

/// Inner edges plus copy targets (18 qubits for the three-plaquette layout).
std::vector<QubitId> tee_region(const LatticeLayout& layout);

/// Boundary data of a subregion R of the TEE region: n strings cross the
/// boundary and the complement splits into j connected pieces.
struct RegionGeometry {
  int n = 0;
  int j = 0;
};

RegionGeometry region_geometry(const LatticeLayout& layout, const std::vector<QubitId>& region);

/// Nine schemes: three orientations (one per plaquette) times three divisions.
std::vector<PartitionScheme> tee_partition_schemes(const LatticeLayout& layout);

/// Human-readable JSON export of the layout and, when available, the
/// boundary copies and partition schemes.
std::string layout_to_json(const LatticeLayout& layout);

}  // namespace fibstring
