#pragma once

#include "copo/certificates.hpp"
#include "copo/copositivity.hpp"
#include "copo/cut_pool.hpp"
#include "copo/feasible_set.hpp"
#include "copo/types.hpp"

#include <string>
#include <vector>

namespace copo {

// Cutting-plane evaluation of the convex underestimator
//
//   phi_hat(x) = sup { -alpha - 2 x'w : [alpha, w'; w, A] set-copositive on F }
//
// and of its epsilon-regularised variant, where the objective gains the
// penalty -2*eps*||w||_2.  The feasible region is approximated from outside
// by finitely many evaluation points of F held in a CutPool; the exact
// separation problem is a set-copositivity check.

struct EnvelopeConfig {
  double epsilon = 0.05;    // default regularisation weight
  double tol = 1e-6;        // copositivity tolerance fed to the oracle
  int max_iter = 200;       // master/oracle round budget
  double trust = 1e6;       // box on (alpha, w); hitting it signals unboundedness
  int seed_count = 20;      // random feasible seed points per block
  std::uint64_t seed = 20250814;  // rng stream for the seed sampler
  Vector witness;           // known feasible point, seeded first when set
  GlobalConfig oracle;      // base budget for the copositivity solver
};

enum class EnvelopeStatusKind {
  Value,         // converged; `value` and `cert` are valid
  UnboundedRay,  // dual unbounded at this x (x outside the evaluated domain)
  Failed,        // stalled or budget exhausted without a verdict; see `note`
};

struct TraceRow {
  int k = 0;
  double master_value = 0.0;
  double oracle_min = 0.0;
};

struct EnvelopeOutcome {
  EnvelopeStatusKind kind = EnvelopeStatusKind::Failed;
  double value = 0.0;
  EnvelopeCertificate cert;
  std::vector<TraceRow> trace;
  Vector last_incumbent;  // best oracle point from the final separation call
  std::string note;
};

// Fills `pool` with lifted points of F: the witness hint (if nonempty), the
// projections of sqrt(r)*e_j onto F, and `count` random feasible samples.
// Falls back to a feasibility probe of F when everything else fails, and
// throws if F itself is empty.
void seed_cut_pool(CutPool& pool, const BlockFeasibleSet& F, int count, std::uint64_t seed,
                   const Vector& witness = Vector());

class EnvelopeEngine {
 public:
  EnvelopeEngine(Matrix A, BlockFeasibleSet F, EnvelopeConfig config = {});

  // Evaluates the regularised underestimator at x.  epsilon == 0 gives the
  // plain envelope dual; epsilon > 0 subtracts 2*eps*||w|| from the value.
  EnvelopeOutcome evaluate(const Vector& x, double epsilon);

  // Searches for an improving ray: a normalised pair (alpha, w) with
  // [alpha, w'; w, 0] set-copositive on F and -alpha - 2x'w > 0.  Success
  // returns kind == Value with cert.is_ray == true; a terminal master value
  // below tol means no ray exists at this x (kind == Failed).
  EnvelopeOutcome improving_ray(const Vector& x);

  const CutPool& pool() const { return pool_; }
  const Matrix& block_matrix() const { return A_; }
  const BlockFeasibleSet& set() const { return F_; }

 private:
  void ensure_seeded();

  Matrix A_;
  BlockFeasibleSet F_;
  EnvelopeConfig cfg_;
  CutPool pool_;
  bool seeded_ = false;
  Vector warm_;  // previous master point (alpha, w), reused as a QP hint
};

// One-shot wrappers around a throwaway engine.
EnvelopeOutcome evaluate_envelope(const Matrix& A, const BlockFeasibleSet& F, const Vector& x,
                                  double epsilon, double tol = 1e-6, int max_iter = 200);
EnvelopeOutcome find_improving_ray(const BlockFeasibleSet& F, const Vector& x, double tol = 1e-6,
                                   int max_iter = 200);

}  // namespace copo
