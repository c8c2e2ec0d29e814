#pragma once

#include "copo/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace copo {

// One quadratic equality z'Dz = rhs with D PSD.
struct QuadEquality {
  Matrix D;
  double rhs = 0.0;
};

// Ground set F = { z : z >= 0 (if nonneg), z'D_j z = rhs_j for all j,
//                  z'z <= ball_radius }. ball_radius bounds the SQUARED
// norm (the paper-style common r). F is compact whenever ball_radius is
// finite, which this project requires.
struct BlockFeasibleSet {
  Index n = 0;
  std::vector<QuadEquality> quad_eqs;
  double ball_radius = 0.0;
  bool nonneg = true;
};

inline constexpr double kMembershipTol = 1e-6;

void validate_set(const BlockFeasibleSet& F);

// Sign/equality/ball membership, all at the same additive tolerance.
bool check_membership(const BlockFeasibleSet& F, const Vector& z, double tol = kMembershipTol);

// Largest violation across sign, equality and ball constraints (0 if inside).
double membership_residual(const BlockFeasibleSet& F, const Vector& z);

// Per-coordinate interval [lo_l, hi_l] containing F: hi_l = sqrt(r) tightened
// by sqrt(rhs_j / D_j(l,l)) for every entrywise-nonnegative D_j, lo_l = 0
// under nonneg (else -hi_l).
void coordinate_box(const BlockFeasibleSet& F, Vector& lo, Vector& hi);

// Linear row v'z = s implied by a rank-one equality z'(vv')z = s^2 when v can
// be chosen nonnegative (so v'z >= 0 fixes the sign of the root).
struct LinearRow {
  Vector v;
  double s = 0.0;
  int source_eq = -1;
};
std::vector<LinearRow> rank_one_rows(const BlockFeasibleSet& F);

// Gauss-Newton projection of z0 onto the equality surfaces, clipped to the
// coordinate box each step. Returns a point passing check_membership at tol,
// or nullopt if the iteration stalls.
std::optional<Vector> project_onto_set(const BlockFeasibleSet& F, Vector z0, int max_iter = 60,
                                       double tol = kMembershipTol);

// Deterministic feasible samples: random box points projected onto F.
// May return fewer than count if projection keeps failing.
std::vector<Vector> sample_feasible(const BlockFeasibleSet& F, int count, std::uint64_t seed);

}  // namespace copo
