// Copyright 2026 The trajreid Authors
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

#ifndef TRAJREID_DIHEDRAL_H_
#define TRAJREID_DIHEDRAL_H_

#include <array>
#include <cstdint>
#include <string_view>

#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "trajreid/trace_store.h"

namespace trajreid {

// The eight symmetries of the square, in the order searched by city
// matching. The order doubles as the argmax tie-break index.
enum class DihedralTransform : uint8_t {
  kIdentity = 0,
  kFlipX = 1,          // (x, y) -> (x, -y)
  kFlipY = 2,          // (x, y) -> (-x, y)
  kFlipBoth = 3,       // flip-x after flip-y
  kRot90 = 4,          // (x, y) -> (y, -x)
  kRotMinus90 = 5,     // (x, y) -> (-y, x)
  kRot90FlipX = 6,     // rot+90 after flip-x
  kRot90FlipY = 7,     // rot+90 after flip-y
};

inline constexpr std::array<DihedralTransform, 8> kAllTransforms = {
    DihedralTransform::kIdentity,   DihedralTransform::kFlipX,
    DihedralTransform::kFlipY,      DihedralTransform::kFlipBoth,
    DihedralTransform::kRot90,      DihedralTransform::kRotMinus90,
    DihedralTransform::kRot90FlipX, DihedralTransform::kRot90FlipY};

inline constexpr std::string_view TransformName(DihedralTransform t) {
  constexpr std::array<std::string_view, 8> kNames = {
      "identity", "flip-x",       "flip-y",        "flip-both",
      "rot+90",   "rot-90",       "rot+90*flip-x", "rot+90*flip-y"};
  return kNames[static_cast<size_t>(t)];
}

inline absl::StatusOr<DihedralTransform> ParseTransform(std::string_view s) {
  for (DihedralTransform t : kAllTransforms) {
    if (TransformName(t) == s) return t;
  }
  return absl::InvalidArgumentError(absl::StrCat("unknown transform '", std::string(s), "'"));
}

// Integer matrix acting on (x, y) column vectors in grid-centered
// coordinates.
struct Matrix2 {
  int a, b, c, d;  // [[a, b], [c, d]]
  friend constexpr bool operator==(const Matrix2&, const Matrix2&) = default;
};

inline constexpr Matrix2 TransformMatrix(DihedralTransform t) {
  constexpr std::array<Matrix2, 8> kMatrices = {{
      {1, 0, 0, 1},
      {1, 0, 0, -1},
      {-1, 0, 0, 1},
      {-1, 0, 0, -1},
      {0, 1, -1, 0},
      {0, -1, 1, 0},
      {0, -1, -1, 0},
      {0, 1, 1, 0},
  }};
  return kMatrices[static_cast<size_t>(t)];
}

inline constexpr Matrix2 Multiply(const Matrix2& l, const Matrix2& r) {
  return {l.a * r.a + l.b * r.c, l.a * r.b + l.b * r.d,
          l.c * r.a + l.d * r.c, l.c * r.b + l.d * r.d};
}

// Returns `outer` applied after `inner`.
inline constexpr DihedralTransform Compose(DihedralTransform outer,
                                           DihedralTransform inner) {
  const Matrix2 m = Multiply(TransformMatrix(outer), TransformMatrix(inner));
  for (DihedralTransform t : kAllTransforms) {
    if (TransformMatrix(t) == m) return t;
  }
  return DihedralTransform::kIdentity;  // unreachable: the group is closed
}

inline constexpr DihedralTransform Inverse(DihedralTransform t) {
  const Matrix2 m = TransformMatrix(t);
  const Matrix2 transposed{m.a, m.c, m.b, m.d};
  for (DihedralTransform u : kAllTransforms) {
    if (TransformMatrix(u) == transposed) return u;
  }
  return DihedralTransform::kIdentity;
}

inline constexpr bool SwapsAxes(DihedralTransform t) {
  return TransformMatrix(t).a == 0;
}

// Maps a cell of a width x height grid to its image, re-indexed into
// non-negative coordinates of the transformed grid.
inline Cell TransformCell(DihedralTransform t, Cell c, int width, int height) {
  const Matrix2 m = TransformMatrix(t);
  // Doubled centered coordinates stay integral for even and odd sides.
  const int cx = 2 * c.x - (width - 1);
  const int cy = 2 * c.y - (height - 1);
  const int nx = m.a * cx + m.b * cy;
  const int ny = m.c * cx + m.d * cy;
  const int out_w = SwapsAxes(t) ? height : width;
  const int out_h = SwapsAxes(t) ? width : height;
  return {(nx + out_w - 1) / 2, (ny + out_h - 1) / 2};
}

}  // namespace trajreid

#endif  // TRAJREID_DIHEDRAL_H_
