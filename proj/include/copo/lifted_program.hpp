#pragma once

#include "copo/feasible_set.hpp"
#include "copo/quadratic_form.hpp"
#include "copo/types.hpp"

#include <vector>

namespace copo {

// Linear constraint H . P = b on the lifted matrix P ~ [1; u][1; u]'.
struct LiftedConstraint {
  Matrix H;  // symmetric, (1+n) x (1+n)
  double b = 0.0;
};

// Lifted conic model of  min { q(u) : u in F, h_k(u) = b_k, u_x = x }:
//   inf { Qhat . P : H_k . P = b_k, P in conv{ zz' : z in cone({1} x F) } }.
// Constraint 0 is always the homogenization row e1 e1' . P = 1. The first
// n_x ground coordinates are the parameter block x; the rest are inner
// variables minimized over.
struct LiftedProgram {
  Index dim = 0;  // 1 + ground dimension
  Matrix Qhat;
  std::vector<LiftedConstraint> constraints;
  BlockFeasibleSet ground;
  Index n_x = 0;

  Index ground_dim() const { return dim - 1; }
  Index n_y() const { return ground_dim() - n_x; }

  Vector b() const {
    Vector out(static_cast<Index>(constraints.size()));
    for (std::size_t k = 0; k < constraints.size(); ++k)
      out[static_cast<Index>(k)] = constraints[k].b;
    return out;
  }
};

// Validates dimensions, symmetrizes all matrices, prepends the e1 e1' row if
// absent. Throws on inconsistent shapes.
LiftedProgram make_lifted_program(Matrix Qhat, std::vector<LiftedConstraint> constraints,
                                  BlockFeasibleSet ground, Index n_x);

// Value of constraint k at a ground point u: [1 u'] H_k [1; u].
double constraint_value(const LiftedConstraint& c, const Vector& u);

// Objective at a ground point: [1 u'] Qhat [1; u].
double objective_value(const LiftedProgram& lp, const Vector& u);

// True value function phi(x) = min over inner variables, evaluated by exact
// enumeration only in tests; here the generic interface exposes the pieces
// needed by the dual engines.
QuadraticForm lifted_matrix_form(const Matrix& M);

}  // namespace copo
