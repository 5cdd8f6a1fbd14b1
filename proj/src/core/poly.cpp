// SPDX-License-Identifier: Apache-2.0
#include "poly.hpp"

#include <algorithm>

namespace ws {

double Poly::eval(double x, double y) const {
  // Evaluate block by block; powers built incrementally.
  double result = 0.0;
  std::vector<double> xp(deg_ + 1, 1.0), yp(deg_ + 1, 1.0);
  for (int i = 1; i <= deg_; ++i) {
    xp[i] = xp[i - 1] * x;
    yp[i] = yp[i - 1] * y;
  }
  int idx = 0;
  for (int d = 0; d <= deg_; ++d)
    for (int j = 0; j <= d; ++j, ++idx) {
      double c = c_[idx];
      if (c != 0.0) result += c * xp[d - j] * yp[j];
    }
  return result;
}

Poly Poly::dx() const {
  if (deg_ == 0) return Poly();
  Poly r(deg_ - 1);
  for (int d = 1; d <= deg_; ++d)
    for (int j = 0; j <= d; ++j) {
      int i = d - j;
      if (i >= 1) r.at(i - 1, j) += i * c_[index(i, j)];
    }
  return r;
}

Poly Poly::dy() const {
  if (deg_ == 0) return Poly();
  Poly r(deg_ - 1);
  for (int d = 1; d <= deg_; ++d)
    for (int j = 1; j <= d; ++j) {
      int i = d - j;
      r.at(i, j - 1) += j * c_[index(i, j)];
    }
  return r;
}

Poly Poly::operator+(const Poly& o) const {
  Poly r(std::max(deg_, o.deg_));
  for (int d = 0; d <= r.deg_; ++d)
    for (int j = 0; j <= d; ++j)
      r.at(d - j, j) = coeff(d - j, j) + o.coeff(d - j, j);
  return r;
}

Poly Poly::operator-(const Poly& o) const {
  Poly r(std::max(deg_, o.deg_));
  for (int d = 0; d <= r.deg_; ++d)
    for (int j = 0; j <= d; ++j)
      r.at(d - j, j) = coeff(d - j, j) - o.coeff(d - j, j);
  return r;
}

Poly Poly::operator*(double s) const {
  Poly r = *this;
  for (auto& c : r.c_) c *= s;
  return r;
}

Poly Poly::operator*(const Poly& o) const {
  Poly r(deg_ + o.deg_);
  for (int d1 = 0; d1 <= deg_; ++d1)
    for (int j1 = 0; j1 <= d1; ++j1) {
      double a = c_[index(d1 - j1, j1)];
      if (a == 0.0) continue;
      for (int d2 = 0; d2 <= o.deg_; ++d2)
        for (int j2 = 0; j2 <= d2; ++j2) {
          double b = o.c_[index(d2 - j2, j2)];
          if (b != 0.0) r.at(d1 - j1 + d2 - j2, j1 + j2) += a * b;
        }
    }
  return r;
}

int Poly::effective_degree(double tol) const {
  for (int d = deg_; d >= 1; --d) {
    for (int j = 0; j <= d; ++j)
      if (std::abs(c_[index(d - j, j)]) > tol) return d;
  }
  return 0;
}

}  // namespace ws
