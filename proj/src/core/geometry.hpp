// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>

namespace ws {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double norm() const { return std::sqrt(x * x + y * y); }
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }

// 2x2 matrix, row-major entries (a00, a01, a10, a11).
struct Mat2 {
  std::array<double, 4> a{0.0, 0.0, 0.0, 0.0};

  double& operator()(int i, int j) { return a[2 * i + j]; }
  double operator()(int i, int j) const { return a[2 * i + j]; }

  Mat2 operator+(const Mat2& o) const {
    return Mat2{{a[0] + o.a[0], a[1] + o.a[1], a[2] + o.a[2], a[3] + o.a[3]}};
  }
  Mat2 operator-(const Mat2& o) const {
    return Mat2{{a[0] - o.a[0], a[1] - o.a[1], a[2] - o.a[2], a[3] - o.a[3]}};
  }
  Mat2 operator*(double s) const {
    return Mat2{{a[0] * s, a[1] * s, a[2] * s, a[3] * s}};
  }
  Mat2 transpose() const { return Mat2{{a[0], a[2], a[1], a[3]}}; }
  double trace() const { return a[0] + a[3]; }
  // Frobenius inner product, used for all L2 pairings of matrix fields.
  double ddot(const Mat2& o) const {
    return a[0] * o.a[0] + a[1] * o.a[1] + a[2] * o.a[2] + a[3] * o.a[3];
  }
  double frob() const { return std::sqrt(ddot(*this)); }

  static Mat2 identity() { return Mat2{{1.0, 0.0, 0.0, 1.0}}; }
};

// Frame of a cell: polynomials are stored in local coordinates
// X = (x - center) / scale to keep Vandermonde systems well conditioned.
struct Frame {
  Vec2 center;
  double scale = 1.0;

  Vec2 to_local(Vec2 p) const {
    return {(p.x - center.x) / scale, (p.y - center.y) / scale};
  }
};

}  // namespace ws
