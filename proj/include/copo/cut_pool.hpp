#pragma once

#include "copo/feasible_set.hpp"
#include "copo/types.hpp"

#include <vector>

namespace copo {

enum class AddCutOutcome { Added, Duplicate, Invalid };

// Pool of lifted vectors z in R^{1+n}; each encodes the valid linear cut
// z'Sz >= 0 on matrices S constrained to COP(cone({1} x F)). Invariant:
// z(0) = 1 with z(1:) in F (membership at tol), or z(0) = 0 with z(1:) a
// recession direction of cone({1} x F), which for compact F means z = 0, so
// nonzero ray rows are rejected.
class CutPool {
 public:
  explicit CutPool(Index ground_dim) : n_(ground_dim) {}

  Index ground_dim() const { return n_; }
  const std::vector<Vector>& cuts() const { return cuts_; }
  std::size_t size() const { return cuts_.size(); }

  AddCutOutcome add(const BlockFeasibleSet& F, const Vector& z, double tol = kMembershipTol);

 private:
  Index n_;
  std::vector<Vector> cuts_;
};

// Convenience: lift a ground point u in F to the pool vector [1; u].
Vector lift_point(const Vector& u);

}  // namespace copo
