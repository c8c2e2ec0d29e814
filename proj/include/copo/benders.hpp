#pragma once

#include "copo/ball_qp.hpp"
#include "copo/certificates.hpp"
#include "copo/envelope.hpp"
#include "copo/instance.hpp"
#include "copo/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace copo {

// Benders-type decomposition of the block problem: a master QP over the
// shared ball proposes x and per-block epigraph values phi_i; each block's
// envelope engine evaluates its underestimator at the block slice of x and
// returns either an optimality cut phi_i >= -alpha - 2w'x_i - 2*eps*||w||
// or, when the dual diverges, a feasibility cut -alpha - 2w'x_i <= 0.

struct BendersConfig {
  double epsilon = 0.05;   // regularisation weight for subproblem evaluation
  double stop_rel = 1e-4;  // relative subproblem/master agreement at stop
  int max_iters = 60;
  double time_limit_s = 0.0;  // <= 0: no limit
  int jobs = 1;               // subproblem evaluation threads
  double cop_tol = 1e-6;      // copositivity tolerance inside the engines
  int sub_max_iter = 200;     // cutting-plane budget per evaluation
  std::uint64_t seed = 20250814;
};

struct BendersIterRow {
  int k = 0;
  double lb = 0.0;
  double ub = 0.0;   // unbounded() until a feasible point is known
  double gap = 0.0;  // ub - lb, unbounded() while ub is
  int n_opt_cuts = 0;
  int n_feas_cuts = 0;
  double t_total_s = 0.0;
  double t_parallel_s = 0.0;   // ideal wall time: slowest block + overhead
  double t_blocks_s = 0.0;     // summed block evaluation time
  double t_block_max_s = 0.0;  // slowest single block this round
};

struct BendersResult {
  bool converged = false;
  double lower_bound = 0.0;
  double upper_bound = 0.0;  // unbounded() if no feasible point was found
  Vector x;                  // final master point
  Vector phi;                // final master epigraph values
  Vector best_point;         // witness of upper_bound, empty if none
  std::vector<BendersIterRow> history;
  std::vector<std::vector<EnvelopeCertificate>> opt_cuts;   // per block
  std::vector<std::vector<EnvelopeCertificate>> feas_cuts;  // per block
  std::string note;
};

struct MasterSolution {
  QpStatusKind kind = QpStatusKind::IterationLimit;
  Vector x;
  Vector phi;
  double value = 0.0;
};

// Master relaxation: min x'Ax + 2a'x + sum_i phi_i over the shared ball
// (plus block sign constraints), phi_i above every cut and above the
// a-priori floor -(||A_i||_F r + 1). Always feasible and bounded.
MasterSolution solve_benders_master(const BlockQcqpInstance& inst,
                                    const std::vector<std::vector<EnvelopeCertificate>>& opt_cuts,
                                    const std::vector<std::vector<EnvelopeCertificate>>& feas_cuts,
                                    const std::optional<Vector>& warm = std::nullopt);

BendersResult run_benders(const BlockQcqpInstance& inst, const BendersConfig& cfg = {});

struct CutAudit {
  long checked = 0;      // (point, cut) pairs tested
  long violations = 0;   // pairs with slack below -tol
  double worst_slack = 0.0;
};

// Replays every cut against sampled feasible points of its block: optimality
// cuts must satisfy alpha + 2w'z + z'A_i z + 2*eps*||w|| >= -tol, feasibility
// cuts alpha + 2w'z >= -tol.
CutAudit audit_cuts(const BlockQcqpInstance& inst,
                    const std::vector<std::vector<EnvelopeCertificate>>& opt_cuts,
                    const std::vector<std::vector<EnvelopeCertificate>>& feas_cuts,
                    int samples = 200, double tol = 1e-5, std::uint64_t seed = 20250814);

}  // namespace copo
