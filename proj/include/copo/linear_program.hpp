#pragma once

#include "copo/types.hpp"

#include <vector>

namespace copo {

enum class RowSense { LE, GE, EQ };

// maximize c'v subject to rows a_i'v {<=,>=,=} rhs_i and lo <= v <= hi.
// Bounds default to free; use unbounded() sentinels for one-sided bounds.
struct LinearProgram {
  Index n = 0;
  Vector c;
  std::vector<Vector> rows;
  std::vector<double> rhs;
  std::vector<RowSense> sense;
  Vector lo, hi;

  LinearProgram() = default;
  explicit LinearProgram(Index n_vars)
      : n(n_vars),
        c(Vector::Zero(n_vars)),
        lo(Vector::Constant(n_vars, -unbounded())),
        hi(Vector::Constant(n_vars, unbounded())) {}

  void add_row(Vector a, RowSense s, double b) {
    if (a.size() != n) throw std::invalid_argument("LinearProgram::add_row: dimension mismatch");
    rows.push_back(std::move(a));
    sense.push_back(s);
    rhs.push_back(b);
  }
  Index m() const { return static_cast<Index>(rows.size()); }
};

enum class LpStatusKind { Optimal, Unbounded, Infeasible, IterationLimit };

struct LpResult {
  LpStatusKind kind = LpStatusKind::IterationLimit;
  Vector v;       // Optimal: maximizer
  double value = 0.0;
  Vector duals;   // Optimal: row multipliers y (value = c'v, y from the basis)
  Vector ray;     // Unbounded: feasible improving direction
  Vector farkas;  // Infeasible: phase-1 row multipliers certifying emptiness
  long iterations = 0;
};

// Dense bounded-variable two-phase primal simplex. Pricing is largest
// reduced cost with lowest-index ties; after a degenerate-pivot streak the
// rule switches to Bland's, which guarantees termination. Hitting the
// iteration cap is reported as IterationLimit, never silently.
LpResult solve_lp(const LinearProgram& lp, const Tolerances& tols = {});

}  // namespace copo
