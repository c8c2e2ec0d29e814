#pragma once

#include "copo/feasible_set.hpp"
#include "copo/quadratic_form.hpp"
#include "copo/types.hpp"

#include <optional>

namespace copo {

struct GlobalConfig {
  double gap_tol = 1e-5;  // absolute incumbent-vs-bound gap at termination
  long node_budget = 200000;
  int obbt_passes = 1;
  int refine_rounds = 2;            // extra tangent rounds per node
  std::optional<double> stop_when_lb_ge;  // early certify: bound proves min >= threshold
  std::optional<double> stop_when_ub_le;  // early certify: incumbent proves min <= threshold
  bool stop_at_first_feasible = false;
  std::optional<Vector> warm_start;
};

enum class GlobalStatusKind { Solved, BudgetExhausted, EarlyCertified, Infeasible };

struct GlobalResult {
  GlobalStatusKind kind = GlobalStatusKind::Infeasible;
  double lower_bound = 0.0;   // valid bound on the global minimum
  ExtendedValue upper;        // incumbent value, +infinity tag if none found
  Vector minimizer;           // incumbent point (empty if none)
  long nodes = 0;
  double gap() const {
    if (!upper.is_finite() || is_unbounded(lower_bound)) return unbounded();
    return upper.value() - lower_bound;
  }
};

// Global minimum of f over F by spatial branch and bound. Quadratic
// equalities are lifted per eigen-direction with tangent/secant envelopes,
// the convex objective split enters through epigraph tangents, the concave
// split through the same direction variables. Deterministic: best-first with
// FIFO ties, lowest-index branching ties.
GlobalResult solve_global(const QuadraticForm& f, const BlockFeasibleSet& F,
                          const GlobalConfig& cfg = {});

struct GridMinResult {
  ExtendedValue value;        // +infinity tag when no grid point passes membership
  Vector argmin;              // scored feasible point attaining `value`
  double error_bound = 0.0;   // Lipschitz-derived bound on |value - true min|
  long feasible_points = 0;
};

// Reference oracle: exhaustive scan of a uniform grid over the coordinate
// box. Lattice points within a spacing-scaled tolerance of F are pulled onto
// F and scored there, so `value` estimates the true minimum from a set of
// certified-feasible points and error_bound is valid in both directions.
// Only for n <= 4.
GridMinResult brute_force_min(const QuadraticForm& f, const BlockFeasibleSet& F, int resolution);

}  // namespace copo
