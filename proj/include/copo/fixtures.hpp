#pragma once

#include "copo/feasible_set.hpp"
#include "copo/lifted_program.hpp"
#include "copo/types.hpp"

namespace copo {

// Hand-built reference problems with closed-form value functions. All of
// them live on simplices, so every ground set is compact; the degenerate
// relatives of these families with an empty linear constraint have
// noncompact feasible sets and are intentionally not constructible here.

// One block, F = {z in R^2_+ : z_1 + z_2 = 1}, objective z'Az = b z_2^2.
// Along the segment parametrization z = (x, 1-x), x in [0, 1]:
//   phi(x) = b(1-x)^2,
//   envelope(x) = b(1-x)^2 for b >= 0 (phi is convex),
//                 b(1-x)   for b <  0 (secant through (0, b) and (1, 0)).
struct EnvelopeFixture {
  double b = 1.0;
  Matrix A;
  BlockFeasibleSet F;
  Vector witness;

  Vector embed(double x) const {
    Vector z(2);
    z << x, 1.0 - x;
    return z;
  }
  double phi(double x) const { return b * (1.0 - x) * (1.0 - x); }
  double envelope(double x) const { return b >= 0.0 ? phi(x) : b * (1.0 - x); }
};

EnvelopeFixture make_env_simplex(double b);

// Lifted program of phi(x) = inf { 2Bxy + Cy^2 : x + y = 1, x, y >= 0 } with
// parameter block x (n_x = 1). Closed form on [0, 1]:
//   phi(x) = (C - 2B) x^2 + 2(B - C) x + C.
LiftedProgram make_quad_1d(double B, double C);
double quad_1d_phi(double B, double C, double x);

// Lifted program of phi(x) = inf { 2x'By + y'Cy : e'x + e'y = 1, y >= 0 }
// with n_x = n_y = 2, B = -I and the fixed positive semidefinite C below.
// dom phi = conv({0} + unit simplex); the inner problem reduces to a
// quadratic on the segment {y >= 0 : e'y = 1 - e'x} and is evaluated in
// closed form. Outside the domain the value is the infinity tag.
LiftedProgram make_quad_2d();
Matrix quad_2d_C();
bool quad_2d_in_dom(const Vector& x, double tol = 1e-9);
ExtendedValue quad_2d_phi(const Vector& x);

}  // namespace copo
