// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "assembly.hpp"

namespace ws {

// Manufactured smooth solutions on the unit square with u = 0 on the
// boundary.  "default" exercises all error components; "divfree" has
// div u = 0 so the exact stress does not depend on lambda (locking test).
struct Manufactured {
  std::string name;
  Vec2 (*u)(Vec2) = nullptr;
  Mat2 (*grad_u)(Vec2) = nullptr;
  // Laplacian of u and grad(div u), for the body force.
  Vec2 (*lap_u)(Vec2) = nullptr;
  Vec2 (*grad_div_u)(Vec2) = nullptr;

  Mat2 sigma(const Material& mat, Vec2 p) const;
  double gamma_r(Vec2 p) const;  // gamma = chi(gamma_r)
  Vec2 body_force(const Material& mat, Vec2 p) const;
};

const Manufactured& manufactured_case(const std::string& name);

}  // namespace ws
