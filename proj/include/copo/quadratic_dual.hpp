#pragma once

#include "copo/certificates.hpp"
#include "copo/cut_pool.hpp"
#include "copo/envelope.hpp"
#include "copo/lifted_program.hpp"
#include "copo/types.hpp"

#include <string>
#include <vector>

namespace copo {

// Cutting-plane solvers for the copositive duals of a lifted program
//
//   sup { b'lambda + w'x (+ x'Wx) :
//         Qhat - sum_k lambda_k H_k - B*(w, W) set-copositive on the ground set }
//
// where B*(w, W) places w on the border row/column of the parameter block and
// W inside it. With W absent this evaluates the affine dual (the lifted
// analogue of the block envelope); with W present it produces quadratic
// underestimators of the value function.

enum class DualStatusKind {
  Value,      // converged; certificate fields are valid
  Unbounded,  // trust region hit: the dual diverges at this parameter point
  Infeasible, // the pinned-value row admits no dual point (search only)
  Failed,     // stalled or out of iterations; see `note`
};

struct AffineDualOutcome {
  DualStatusKind kind = DualStatusKind::Failed;
  double value = 0.0;  // b'lambda + w'x
  Vector lambda;
  Vector w;
  std::vector<TraceRow> trace;
  std::string note;
};

struct QuadraticDualOutcome {
  DualStatusKind kind = DualStatusKind::Failed;
  double value = 0.0;  // b'lambda + w'x + x'Wx (solve) or x2'W x2 (search)
  QuadraticCertificate cert;
  std::vector<TraceRow> trace;
  std::string note;
};

// Affine dual at x: variables (lambda, w), no curvature block. A caller
// evaluating many points may hand in a persistent pool (seeded on first use)
// so later evaluations start from the accumulated outer approximation.
AffineDualOutcome evaluate_lifted_envelope(const LiftedProgram& lp, const Vector& x,
                                           double tol = 1e-6, int max_iter = 200,
                                           CutPool* shared_pool = nullptr);

// Full quadratic dual at x: variables (lambda, w, W) with W symmetric free.
QuadraticDualOutcome solve_quadratic_dual(const LiftedProgram& lp, const Vector& x,
                                          double tol = 1e-6, int max_iter = 200);

// Among quadratic dual certificates whose induced underestimator passes
// through `target` at x1, maximizes the pure quadratic term at x2 while
// keeping W positive semidefinite (eigenvector cuts, added lazily before the
// copositivity oracle runs). Infeasible means no convex certificate attains
// `target` at x1 within the trust region.
QuadraticDualOutcome search_convex_quadratic(const LiftedProgram& lp, const Vector& x1,
                                             double target, const Vector& x2, double tol = 1e-6,
                                             int max_iter = 200);

}  // namespace copo
