#pragma once

#include "copo/feasible_set.hpp"
#include "copo/quadratic_form.hpp"
#include "copo/types.hpp"

#include <vector>

namespace copo {

// One coupled block: inner objective z'Az over ground set F, with a stored
// feasibility witness (kept with the instance so nonemptiness stays certified
// through serialization round trips).
struct Block {
  Matrix A;
  BlockFeasibleSet F;
  Vector witness;
};

// min_x  x'Ax + 2a'x + sum_i phi_i(x_i)   s.t. x'x <= r,
// phi_i(x_i) = x_i'A_i x_i if x_i in F_i, +infinity otherwise.
// All blocks share the dimension n and the squared-radius r.
struct BlockQcqpInstance {
  Index S = 0;
  Index n = 0;
  Matrix A;  // (S n) x (S n), PSD
  Vector a;  // S n
  double r = 0.0;
  std::vector<Block> blocks;
};

// Dimension checks, A PSD at 1e-8 on the smallest eigenvalue, every F_i valid
// and nonempty as certified by its witness. Throws on violation.
void validate_instance(const BlockQcqpInstance& inst);

// phi_i at z: z'A_i z when z passes membership at tol, +infinity tag outside.
ExtendedValue eval_phi_block(const Block& block, const Vector& z, double tol = kMembershipTol);

inline Vector block_slice(const BlockQcqpInstance& inst, const Vector& x, Index i) {
  return x.segment(i * inst.n, inst.n);
}

// Full objective x'(A + blkdiag(A_i))x + 2a'x as one form over R^{Sn}.
QuadraticForm monolithic_objective(const BlockQcqpInstance& inst);

// Feasible set of the monolithic problem: block-embedded equalities, shared
// ball, orthant. Ground for solving the undecomposed problem globally.
BlockFeasibleSet monolithic_set(const BlockQcqpInstance& inst);

// Objective value at a monolithically feasible x (+infinity outside).
ExtendedValue eval_instance_objective(const BlockQcqpInstance& inst, const Vector& x,
                                      double tol = kMembershipTol);

}  // namespace copo
