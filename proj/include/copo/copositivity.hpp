#pragma once

#include "copo/feasible_set.hpp"
#include "copo/global_solver.hpp"
#include "copo/types.hpp"

namespace copo {

// Verdict on M being in COP(cone({1} x F)): by homogeneity it suffices to
// minimize [1 z'] M [1; z] over z in F (the apex coordinate can be fixed to 1
// because F is compact, so e1 lies in the interior of the dual cone).
struct CopositivityResult {
  bool nonnegative = false;
  double min_lower_bound = 0.0;  // certified bound on the minimum over F
  Vector violator;               // point of F with value < -tol (when !nonnegative)
  double violation_value = 0.0;
  Vector incumbent;              // best point of F seen, regardless of verdict
  double incumbent_value = 0.0;
  long nodes = 0;
  bool decisive = true;  // false if the minimum landed inside the tol decision band
};

// Nonnegative when the certified bound reaches -tol; Violator when a point of
// F with value below -tol is found. The branch-and-bound gap target is tol/10
// so the decision band around -tol stays one order below the verdict
// tolerance. Throws on empty F: emptiness never reads as copositive.
CopositivityResult check_set_copositivity(const Matrix& M, const BlockFeasibleSet& F,
                                          double tol = 1e-6, const GlobalConfig& base = {});

}  // namespace copo
