// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cassert>
#include <vector>

#include "geometry.hpp"

namespace ws {

// Dense bivariate polynomial over monomials x^i y^j with i + j <= degree.
// Coefficient layout is graded: block d = i + j, index within block = j.
class Poly {
 public:
  Poly() : deg_(0), c_(1, 0.0) {}
  explicit Poly(int degree) : deg_(degree), c_(size(degree), 0.0) {}

  static int size(int degree) { return (degree + 1) * (degree + 2) / 2; }
  static int index(int i, int j) {
    int d = i + j;
    return d * (d + 1) / 2 + j;
  }

  int degree() const { return deg_; }
  double coeff(int i, int j) const {
    return (i + j <= deg_) ? c_[index(i, j)] : 0.0;
  }
  double& at(int i, int j) {
    assert(i >= 0 && j >= 0 && i + j <= deg_);
    return c_[index(i, j)];
  }

  static Poly monomial(int i, int j, double coeff = 1.0) {
    Poly p(i + j);
    p.at(i, j) = coeff;
    return p;
  }
  static Poly constant(double v) {
    Poly p(0);
    p.at(0, 0) = v;
    return p;
  }

  double eval(double x, double y) const;
  double eval(Vec2 p) const { return eval(p.x, p.y); }

  Poly dx() const;
  Poly dy() const;

  Poly operator+(const Poly& o) const;
  Poly operator-(const Poly& o) const;
  Poly operator*(double s) const;
  Poly operator*(const Poly& o) const;
  Poly& operator+=(const Poly& o) { return *this = *this + o; }

  // True max degree after dropping trailing zero blocks.
  int effective_degree(double tol = 0.0) const;

 private:
  int deg_;
  std::vector<double> c_;
};

// Small fixed-size bundles used for vector and matrix valued fields.
struct PolyVec {
  Poly x, y;

  Vec2 eval(Vec2 p) const { return {x.eval(p), y.eval(p)}; }
  // div v = dx(v_x) + dy(v_y), in the same coordinate frame.
  Poly div() const { return x.dx() + y.dy(); }
  PolyVec operator+(const PolyVec& o) const { return {x + o.x, y + o.y}; }
  PolyVec operator*(double s) const { return {x * s, y * s}; }
};

struct PolyMat {
  // Row-major: rows are (m00, m01) and (m10, m11).
  Poly m00, m01, m10, m11;

  Mat2 eval(Vec2 p) const {
    return Mat2{{m00.eval(p), m01.eval(p), m10.eval(p), m11.eval(p)}};
  }
  PolyVec row(int r) const { return r == 0 ? PolyVec{m00, m01} : PolyVec{m10, m11}; }
  // Row-wise divergence -> vector.
  PolyVec rowdiv() const { return {m00.dx() + m01.dy(), m10.dx() + m11.dy()}; }
};

// 2D curl of a scalar: curl q = (-dq/dy, dq/dx).
inline PolyVec curl2(const Poly& q) { return {q.dy() * (-1.0), q.dx()}; }

// rot q = (dq/dy, -dq/dx); sign convention fixed project-wide.
inline PolyVec rot2(const Poly& q) { return {q.dy(), q.dx() * (-1.0)}; }

// Row-wise curl of a vector field -> matrix field.
inline PolyMat rowcurl(const PolyVec& v) {
  return {v.x.dy() * (-1.0), v.x.dx(), v.y.dy() * (-1.0), v.y.dx()};
}

}  // namespace ws
