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

#include <compare>
#include <cstddef>
#include <functional>
#include <string>
#include <string_view>

namespace fibstring {

/// Grid label Q(row,col) of a physical qubit. Ordering is row-major, which is
/// also the order used for printed bitstrings.
struct QubitId {
  int row = 0;
  int col = 0;

  auto operator<=>(const QubitId&) const = default;

  std::string str() const;
  /// Accepts "Q(5,9)" or "5,9". Throws std::invalid_argument.
  static QubitId parse(std::string_view text);
};

/// Control wire with the value that enables the gate.
struct Control {
  QubitId qubit;
  int value = 1;
};

}  // namespace fibstring

template <>
struct std::hash<fibstring::QubitId> {
  std::size_t operator()(const fibstring::QubitId& q) const noexcept {
    return std::hash<long long>()((static_cast<long long>(q.row) << 32) ^ static_cast<unsigned>(q.col));
  }
};
