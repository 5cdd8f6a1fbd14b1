// SPDX-License-Identifier: Apache-2.0
#include "manufactured.hpp"

#include <cmath>
#include <stdexcept>

namespace ws {

Mat2 Manufactured::sigma(const Material& mat, Vec2 p) const {
  Mat2 g = grad_u(p);
  Mat2 e = sym_part(g);
  double dv = g.trace();
  Mat2 s;
  for (int i = 0; i < 4; ++i) s.a[i] = 2.0 * mat.mu * e.a[i];
  s.a[0] += mat.lambda * dv;
  s.a[3] += mat.lambda * dv;
  return s;
}

double Manufactured::gamma_r(Vec2 p) const { return chi_inv(grad_u(p)); }

Vec2 Manufactured::body_force(const Material& mat, Vec2 p) const {
  // f = -div sigma = -mu lap u - (mu + lambda) grad(div u).
  Vec2 l = lap_u(p);
  Vec2 gd = grad_div_u(p);
  return Vec2{-mat.mu * l.x - (mat.mu + mat.lambda) * gd.x,
              -mat.mu * l.y - (mat.mu + mat.lambda) * gd.y};
}

namespace {

constexpr double pi = 3.14159265358979323846;

// u = (sin(pi x) sin(pi y), x(1-x) y(1-y)).
Vec2 def_u(Vec2 p) {
  return {std::sin(pi * p.x) * std::sin(pi * p.y),
          p.x * (1.0 - p.x) * p.y * (1.0 - p.y)};
}
Mat2 def_grad(Vec2 p) {
  double sx = std::sin(pi * p.x), sy = std::sin(pi * p.y);
  double cx = std::cos(pi * p.x), cy = std::cos(pi * p.y);
  double g = p.x * (1.0 - p.x), h = p.y * (1.0 - p.y);
  double gp = 1.0 - 2.0 * p.x, hp = 1.0 - 2.0 * p.y;
  return Mat2{pi * cx * sy, pi * sx * cy, gp * h, g * hp};
}
Vec2 def_lap(Vec2 p) {
  double sx = std::sin(pi * p.x), sy = std::sin(pi * p.y);
  double g = p.x * (1.0 - p.x), h = p.y * (1.0 - p.y);
  return {-2.0 * pi * pi * sx * sy, -2.0 * (g + h)};
}
Vec2 def_grad_div(Vec2 p) {
  // div u = pi cos(pi x) sin(pi y) + g(x) h'(y).
  double sx = std::sin(pi * p.x), sy = std::sin(pi * p.y);
  double cx = std::cos(pi * p.x), cy = std::cos(pi * p.y);
  double g = p.x * (1.0 - p.x);
  double gp = 1.0 - 2.0 * p.x, hp = 1.0 - 2.0 * p.y;
  return {-pi * pi * sx * sy + gp * hp, pi * pi * cx * cy - 2.0 * g};
}

// u = curl(phi), phi = x^2 (1-x)^2 y^2 (1-y)^2, so div u = 0.
double bG(double x) { return x * x * (1.0 - x) * (1.0 - x); }
double bG1(double x) { return 2.0 * x - 6.0 * x * x + 4.0 * x * x * x; }
double bG2(double x) { return 2.0 - 12.0 * x + 12.0 * x * x; }
double bG3(double x) { return -12.0 + 24.0 * x; }

Vec2 df_u(Vec2 p) { return {-bG(p.x) * bG1(p.y), bG1(p.x) * bG(p.y)}; }
Mat2 df_grad(Vec2 p) {
  return Mat2{-bG1(p.x) * bG1(p.y), -bG(p.x) * bG2(p.y),
              bG2(p.x) * bG(p.y), bG1(p.x) * bG1(p.y)};
}
Vec2 df_lap(Vec2 p) {
  return {-bG2(p.x) * bG1(p.y) - bG(p.x) * bG3(p.y),
          bG3(p.x) * bG(p.y) + bG1(p.x) * bG2(p.y)};
}
Vec2 df_grad_div(Vec2) { return {0.0, 0.0}; }

const Manufactured kDefault{"default", def_u, def_grad, def_lap, def_grad_div};
const Manufactured kDivFree{"divfree", df_u, df_grad, df_lap, df_grad_div};

}  // namespace

const Manufactured& manufactured_case(const std::string& name) {
  if (name == "default") return kDefault;
  if (name == "divfree") return kDivFree;
  throw std::invalid_argument("manufactured_case: unknown case '" + name + "'");
}

}  // namespace ws
