#pragma once

#include "copo/types.hpp"

namespace copo {

// Quadratic form x'Qx + 2 q'x + c with Q symmetric. The factor 2 on the
// linear term is the convention used everywhere in this project, including
// lifted matrices: [1 z'] M [1; z] = M(0,0) + 2 M(0,1:)'z + z'M(1:,1:)z.
struct QuadraticForm {
  Matrix Q;
  Vector q;
  double c = 0.0;

  QuadraticForm() = default;
  // Symmetrizes Q on construction; symmetrization is bitwise idempotent.
  QuadraticForm(Matrix Q_in, Vector q_in, double c_in);

  Index dim() const { return q.size(); }
};

double eval_quadratic(const QuadraticForm& f, const Vector& x);

// Gradient of x'Qx + 2 q'x + c, i.e. 2(Qx + q).
Vector gradient(const QuadraticForm& f, const Vector& x);

}  // namespace copo
