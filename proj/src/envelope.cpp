#include "copo/envelope.hpp"

#include "copo/ball_qp.hpp"
#include "copo/global_solver.hpp"
#include "copo/linear_program.hpp"
#include "copo/quadratic_form.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace copo {

namespace {

// Bordered matrix [alpha, w'; w, A] whose set-copositivity certifies the
// master point. Passing a zero A gives the ray variant.
Matrix bordered(double alpha, const Vector& w, const Matrix& A) {
  const Index n = w.size();
  Matrix S(n + 1, n + 1);
  S(0, 0) = alpha;
  S.block(0, 1, 1, n) = w.transpose();
  S.block(1, 0, n, 1) = w;
  S.block(1, 1, n, n) = A;
  return S;
}

struct MasterPoint {
  bool ok = false;
  bool at_trust = false;
  double alpha = 0.0;
  Vector w;
  std::string note;
};

bool hits_trust(const Vector& v, double trust) {
  return v.cwiseAbs().maxCoeff() >= trust * (1.0 - 1e-7);
}

// maximize -alpha - 2x'w  subject to  alpha + 2u'w >= -u'Au per cut [1;u]
// and |alpha|, |w_i| <= trust.  With quad == nullptr the cut right-hand
// sides drop the u'Au term (ray master).
MasterPoint solve_linear_master(const CutPool& pool, const Vector& x, const Matrix* quad,
                                double trust) {
  const Index n = x.size();
  LinearProgram lp(n + 1);
  lp.c(0) = -1.0;
  lp.c.tail(n) = -2.0 * x;
  lp.lo.setConstant(-trust);
  lp.hi.setConstant(trust);
  for (const Vector& z : pool.cuts()) {
    const Vector u = z.tail(n);
    Vector row(n + 1);
    row(0) = 1.0;
    row.tail(n) = 2.0 * u;
    const double rhs = quad ? -(u.dot(*quad * u)) : 0.0;
    lp.add_row(std::move(row), RowSense::GE, rhs);
  }
  MasterPoint out;
  const LpResult lr = solve_lp(lp);
  if (lr.kind != LpStatusKind::Optimal) {
    out.note = "master LP did not solve to optimality";
    return out;
  }
  out.ok = true;
  out.alpha = lr.v(0);
  out.w = lr.v.tail(n);
  out.at_trust = hits_trust(lr.v, trust);
  return out;
}

}  // namespace

void seed_cut_pool(CutPool& pool, const BlockFeasibleSet& F, int count, std::uint64_t seed,
                   const Vector& witness) {
  if (witness.size() == F.n) pool.add(F, lift_point(witness));
  // Scaled coordinate directions, pulled back onto F. These pin down the
  // diagonal entries of the quadratic term early.
  const double rad = std::sqrt(F.ball_radius);
  for (Index j = 0; j < F.n; ++j) {
    Vector cand = Vector::Zero(F.n);
    cand(j) = rad;
    if (auto p = project_onto_set(F, cand)) pool.add(F, lift_point(*p));
  }
  for (const Vector& u : sample_feasible(F, count, seed)) pool.add(F, lift_point(u));
  if (pool.size() > 0) return;
  // Last resort: ask the global solver for any feasible point.
  const QuadraticForm zero{Matrix::Zero(F.n, F.n), Vector::Zero(F.n), 0.0};
  GlobalConfig probe;
  probe.stop_at_first_feasible = true;
  const GlobalResult gr = solve_global(zero, F, probe);
  if (gr.kind == GlobalStatusKind::Infeasible || gr.minimizer.size() == 0)
    throw std::runtime_error("seed_cut_pool: ground set is empty");
  pool.add(F, lift_point(gr.minimizer));
}

EnvelopeEngine::EnvelopeEngine(Matrix A, BlockFeasibleSet F, EnvelopeConfig config)
    : A_(std::move(A)), F_(std::move(F)), cfg_(std::move(config)), pool_(F_.n) {
  if (A_.rows() != F_.n || A_.cols() != F_.n)
    throw std::invalid_argument("EnvelopeEngine: block matrix does not match the set dimension");
  A_ = ((A_ + A_.transpose()) / 2.0).eval();
  validate_set(F_);
}

void EnvelopeEngine::ensure_seeded() {
  if (seeded_) return;
  seed_cut_pool(pool_, F_, cfg_.seed_count, cfg_.seed, cfg_.witness);
  seeded_ = true;
}

EnvelopeOutcome EnvelopeEngine::evaluate(const Vector& x, double epsilon) {
  if (x.size() != F_.n) throw std::invalid_argument("EnvelopeEngine::evaluate: bad x dimension");
  if (epsilon < 0.0) throw std::invalid_argument("EnvelopeEngine::evaluate: epsilon must be >= 0");
  ensure_seeded();

  EnvelopeOutcome out;
  double oracle_tol = cfg_.tol;
  bool retried_deeper = false;

  for (int k = 0; k < cfg_.max_iter; ++k) {
    // --- master over the current outer approximation ---
    MasterPoint mp = solve_linear_master(pool_, x, &A_, cfg_.trust);
    if (!mp.ok) {
      out.kind = EnvelopeStatusKind::Failed;
      out.note = mp.note;
      return out;
    }
    if (epsilon > 0.0) {
      // 2*eps*||w|| = min_tau (eps*tau + eps*||w||^2/tau): alternate plain
      // penalised QPs with tau <- ||w||. Each sweep can only increase the
      // regularised objective, and a fixed point solves the exact problem.
      if (mp.at_trust) {
        // The linear vertex can park on the trust box along a degenerate or
        // improving direction; a 1e6-scale start poisons the penalised QPs.
        // An alpha-only point clears every cut row with unit slack and keeps
        // the alternation at moderate scale.
        double a0 = 0.0;
        for (const Vector& z : pool_.cuts()) {
          const Vector u = z.tail(F_.n);
          a0 = std::max(a0, -(u.dot(A_ * u)));
        }
        mp.alpha = a0 + 1.0;
        mp.w = Vector::Zero(F_.n);
        mp.at_trust = false;
      }
      double tau = std::max(mp.w.norm(), 1.0);
      double prev = -mp.alpha - 2.0 * x.dot(mp.w) - 2.0 * epsilon * mp.w.norm();
      Vector hint(F_.n + 1);
      hint(0) = mp.alpha;
      hint.tail(F_.n) = mp.w;
      for (int sweep = 0; sweep < 40; ++sweep) {
        BallQp qp(F_.n + 1);
        qp.Q.bottomRightCorner(F_.n, F_.n) = (epsilon / tau) * Matrix::Identity(F_.n, F_.n);
        qp.q(0) = 0.5;
        qp.q.tail(F_.n) = x;
        for (const Vector& z : pool_.cuts()) {
          const Vector u = z.tail(F_.n);
          Vector row(F_.n + 1);
          row(0) = 1.0;
          row.tail(F_.n) = 2.0 * u;
          qp.add_row(std::move(row), RowSense::GE, -(u.dot(A_ * u)));
        }
        for (Index j = 0; j < F_.n + 1; ++j) {
          Vector e = Vector::Unit(F_.n + 1, j);
          qp.add_row(e, RowSense::LE, cfg_.trust);
          qp.add_row(-e, RowSense::LE, cfg_.trust);
        }
        qp.start = hint;
        const QpResult qr = solve_ball_qp(qp);
        if (qr.kind != QpStatusKind::Optimal) {
          out.kind = EnvelopeStatusKind::Failed;
          out.note = "regularised master QP did not solve to optimality";
          return out;
        }
        mp.alpha = qr.v(0);
        mp.w = qr.v.tail(F_.n);
        mp.at_trust = hits_trust(qr.v, cfg_.trust);
        hint = qr.v;
        const double cur = -mp.alpha - 2.0 * x.dot(mp.w) - 2.0 * epsilon * mp.w.norm();
        const double wn = mp.w.norm();
        const bool settled = std::abs(cur - prev) <= 1e-10 * (1.0 + std::abs(cur));
        prev = cur;
        tau = std::max(wn, 1e-12);
        if (settled) break;
      }
    }
    double master_value = -mp.alpha - 2.0 * x.dot(mp.w) - 2.0 * epsilon * mp.w.norm();
    if (mp.at_trust && epsilon == 0.0) {
      // Landing on the trust box is ambiguous: it covers both genuine
      // divergence and a degenerate optimal face whose LP vertex merely sits
      // far out (an equality in F makes whole dual lines objective-neutral).
      // A certified improving ray settles it exactly.
      EnvelopeOutcome ray = improving_ray(x);
      if (ray.kind == EnvelopeStatusKind::Value && ray.value > cfg_.tol) {
        out = std::move(ray);
        out.kind = EnvelopeStatusKind::UnboundedRay;
        out.note = "dual value diverges at this point; certified ray attached";
        return out;
      }
      // Finite sup: recover a moderate point on the optimal face so the
      // oracle is not asked to certify trust-sized entries.
      BallQp recover(F_.n + 1);
      recover.Q = Matrix::Identity(F_.n + 1, F_.n + 1);
      for (const Vector& z : pool_.cuts()) {
        const Vector u = z.tail(F_.n);
        Vector row(F_.n + 1);
        row(0) = 1.0;
        row.tail(F_.n) = 2.0 * u;
        recover.add_row(std::move(row), RowSense::GE, -(u.dot(A_ * u)));
      }
      Vector vrow(F_.n + 1);
      vrow(0) = -1.0;
      vrow.tail(F_.n) = -2.0 * x;
      recover.add_row(std::move(vrow), RowSense::GE,
                      master_value - 1e-9 * (1.0 + std::abs(master_value)));
      Vector corner(F_.n + 1);
      corner(0) = mp.alpha;
      corner.tail(F_.n) = mp.w;
      recover.start = corner;  // feasible by construction
      const QpResult rq = solve_ball_qp(recover);
      if (rq.kind == QpStatusKind::Optimal) {
        mp.alpha = rq.v(0);
        mp.w = rq.v.tail(F_.n);
        mp.at_trust = hits_trust(rq.v, cfg_.trust);
        master_value = -mp.alpha - 2.0 * x.dot(mp.w);
      }
    }

    // --- exact separation ---
    const Matrix S = bordered(mp.alpha, mp.w, A_);
    const CopositivityResult cr = check_set_copositivity(S, F_, oracle_tol, cfg_.oracle);
    out.trace.push_back({k, master_value, cr.nonnegative ? cr.min_lower_bound : cr.violation_value});
    if (cr.incumbent.size() > 0) out.last_incumbent = cr.incumbent;
    if (cr.nonnegative) {
      out.kind = EnvelopeStatusKind::Value;
      out.value = master_value;
      out.cert.alpha = mp.alpha;
      out.cert.w = mp.w;
      out.cert.epsilon = epsilon;
      out.cert.is_ray = false;
      if (!cr.decisive) out.note = "oracle verdict within its decision band";
      return out;
    }
    const AddCutOutcome added = pool_.add(F_, lift_point(cr.violator));
    if (added == AddCutOutcome::Added) continue;
    // A repeated (or rejected) violator cannot tighten the master: allow one
    // re-separation at a deeper tolerance before giving up.
    if (!retried_deeper) {
      retried_deeper = true;
      oracle_tol = cfg_.tol / 10.0;
      continue;
    }
    out.kind = EnvelopeStatusKind::Failed;
    out.note = "separation stalled on a repeated violator";
    return out;
  }
  out.kind = EnvelopeStatusKind::Failed;
  out.note = "iteration budget exhausted before the oracle accepted the master point";
  return out;
}

EnvelopeOutcome EnvelopeEngine::improving_ray(const Vector& x) {
  if (x.size() != F_.n)
    throw std::invalid_argument("EnvelopeEngine::improving_ray: bad x dimension");
  ensure_seeded();

  EnvelopeOutcome out;
  const Matrix zero = Matrix::Zero(F_.n, F_.n);
  double oracle_tol = cfg_.tol;
  bool retried_deeper = false;

  for (int k = 0; k < cfg_.max_iter; ++k) {
    // maximize -alpha - 2x'w over the unit ball, cut rows alpha + 2u'w >= 0.
    BallQp qp(F_.n + 1);
    qp.q(0) = 0.5;
    qp.q.tail(F_.n) = x;
    for (const Vector& z : pool_.cuts()) {
      const Vector u = z.tail(F_.n);
      Vector row(F_.n + 1);
      row(0) = 1.0;
      row.tail(F_.n) = 2.0 * u;
      qp.add_row(std::move(row), RowSense::GE, 0.0);
    }
    qp.ball_vars.resize(F_.n + 1);
    for (Index j = 0; j < F_.n + 1; ++j) qp.ball_vars[j] = j;
    qp.ball_rho = 1.0;
    // Start strictly inside the region: every cut row has unit coefficient
    // on alpha and zero right-hand side, so a plain alpha bump clears them
    // all at once. Warm-starting from the previous vertex is a trap here:
    // it sits on the ball and violates the newly added cut, so the phase-1
    // fallback lands on the origin where every row is active and the active
    // set can cycle through zero-length steps.
    Vector interior = Vector::Zero(F_.n + 1);
    interior(0) = 0.9;
    qp.start = std::move(interior);
    const QpResult qr = solve_ball_qp(qp);
    if (qr.kind != QpStatusKind::Optimal) {
      out.kind = EnvelopeStatusKind::Failed;
      out.note = "ray master QP did not solve to optimality";
      return out;
    }
    const double alpha = qr.v(0);
    const Vector w = qr.v.tail(F_.n);
    const double master_value = -alpha - 2.0 * x.dot(w);
    if (master_value <= cfg_.tol) {
      out.kind = EnvelopeStatusKind::Failed;
      out.value = master_value;
      out.note = "no improving ray at this point";
      return out;
    }
    const Matrix S = bordered(alpha, w, zero);
    const CopositivityResult cr = check_set_copositivity(S, F_, oracle_tol, cfg_.oracle);
    out.trace.push_back({k, master_value, cr.nonnegative ? cr.min_lower_bound : cr.violation_value});
    if (cr.incumbent.size() > 0) out.last_incumbent = cr.incumbent;
    if (cr.nonnegative) {
      out.kind = EnvelopeStatusKind::Value;
      out.value = master_value;
      out.cert.alpha = alpha;
      out.cert.w = w;
      out.cert.epsilon = 0.0;
      out.cert.is_ray = true;
      if (!cr.decisive) out.note = "oracle verdict within its decision band";
      return out;
    }
    const AddCutOutcome added = pool_.add(F_, lift_point(cr.violator));
    if (added == AddCutOutcome::Added) continue;
    if (!retried_deeper) {
      retried_deeper = true;
      oracle_tol = cfg_.tol / 10.0;
      continue;
    }
    out.kind = EnvelopeStatusKind::Failed;
    out.note = "separation stalled on a repeated violator";
    return out;
  }
  out.kind = EnvelopeStatusKind::Failed;
  out.note = "iteration budget exhausted before the oracle accepted the master point";
  return out;
}

EnvelopeOutcome evaluate_envelope(const Matrix& A, const BlockFeasibleSet& F, const Vector& x,
                                  double epsilon, double tol, int max_iter) {
  EnvelopeConfig cfg;
  cfg.tol = tol;
  cfg.max_iter = max_iter;
  EnvelopeEngine engine(A, F, cfg);
  return engine.evaluate(x, epsilon);
}

EnvelopeOutcome find_improving_ray(const BlockFeasibleSet& F, const Vector& x, double tol,
                                   int max_iter) {
  EnvelopeConfig cfg;
  cfg.tol = tol;
  cfg.max_iter = max_iter;
  EnvelopeEngine engine(Matrix::Zero(F.n, F.n), F, cfg);
  return engine.improving_ray(x);
}

}  // namespace copo
