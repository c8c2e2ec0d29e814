#include "copo/ball_qp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace copo {

namespace {

constexpr double kStepTol = 1e-11;

struct Subproblem {
  bool unbounded = false;
  Vector v;      // stationary point when bounded
  Vector mu;     // working-set multipliers
  double nu = 0.0;
  Vector ray;    // descent direction when unbounded
};

Vector ball_mask(const BallQp& qp) {
  Vector d = Vector::Zero(qp.n);
  for (Index j : qp.ball_vars) d[j] = 1.0;
  return d;
}

Matrix kkt_matrix(const Matrix& Q, const Matrix& G, const Vector& dmask, double nu) {
  const Index n = Q.rows();
  const Index k = G.rows();
  Matrix K = Matrix::Zero(n + k, n + k);
  K.topLeftCorner(n, n) = 2.0 * Q;
  K.topLeftCorner(n, n) += (2.0 * nu) * dmask.asDiagonal();
  if (k > 0) {
    K.topRightCorner(n, k) = G.transpose();
    K.bottomLeftCorner(k, n) = G;
  }
  return K;
}

// One evaluation of the working-set KKT system at penalty nu. Returns the
// stationary point, multipliers, and (optionally) d v / d nu for the secular
// Newton step. ok=false means the system is inconsistent at this nu.
struct KktEval {
  bool ok = false;
  Vector v, mu, dv;
};

KktEval eval_kkt(const Matrix& Q, const Vector& q, const Matrix& G, const Vector& h,
                 const Vector& dmask, double nu, bool want_derivative) {
  const Index n = q.size();
  const Index k = G.rows();
  const Matrix K = kkt_matrix(Q, G, dmask, nu);
  Vector rhs(n + k);
  rhs.head(n) = -2.0 * q;
  rhs.tail(k) = h;
  KktEval out;
  Eigen::FullPivLU<Matrix> lu(K);
  lu.setThreshold(1e-11);
  Vector sol;
  if (lu.isInvertible()) {
    sol = lu.solve(rhs);
  } else {
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(K);
    sol = cod.solve(rhs);
    const double resid = (K * sol - rhs).lpNorm<Eigen::Infinity>();
    const double scale = 1.0 + rhs.lpNorm<Eigen::Infinity>() + K.lpNorm<Eigen::Infinity>();
    if (resid > 1e-8 * scale) return out;  // inconsistent: subproblem unbounded
  }
  out.ok = true;
  out.v = sol.head(n);
  out.mu = sol.tail(k);
  if (want_derivative) {
    Vector rhs2 = Vector::Zero(n + k);
    rhs2.head(n) = -2.0 * Vector(dmask.asDiagonal() * out.v);
    Vector sol2;
    if (lu.isInvertible()) sol2 = lu.solve(rhs2);
    else sol2 = Eigen::CompleteOrthogonalDecomposition<Matrix>(K).solve(rhs2);
    out.dv = sol2.head(n);
  }
  return out;
}

// Kernel basis of the stacked matrix [2Q + 2 nu D; G] via rank-revealing COD;
// columns span { p : (Q + nu D) p = 0, G p = 0 }.
Matrix stacked_kernel(const Matrix& Q, const Matrix& G, const Vector& dmask, double nu) {
  const Index n = Q.rows();
  Matrix stack(n + G.rows(), n);
  stack.topRows(n) = 2.0 * Q;
  stack.topRows(n) += (2.0 * nu) * dmask.asDiagonal();
  stack.bottomRows(G.rows()) = G;
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(stack);
  cod.setThreshold(1e-10);
  const Index rank = cod.rank();
  if (rank >= n) return Matrix(n, 0);
  Matrix Z = cod.matrixZ().transpose().rightCols(n - rank);
  return cod.colsPermutation() * Z;
}

bool descent_ray(const Matrix& Q, const Vector& grad, const Matrix& G, const Vector& dmask,
                 double nu, Vector& ray) {
  const Matrix Z = stacked_kernel(Q, G, dmask, nu);
  if (Z.cols() == 0) return false;
  const Vector coeff = Z.transpose() * (-grad);
  if (coeff.lpNorm<Eigen::Infinity>() <= 1e-9 * (1.0 + grad.lpNorm<Eigen::Infinity>()))
    return false;
  ray = Z * coeff;
  const double nrm = ray.norm();
  if (nrm <= 1e-12) return false;
  ray /= nrm;
  return true;
}

enum class SecularOutcome { Root, BallSlack, Inconsistent, Failed };

// Root of psi(nu) = ||v_B(nu)||^2 - rho for nu >= 0 (psi is decreasing).
// Newton steps on psi with bisection safeguard inside a grown bracket.
SecularOutcome solve_secular(const Matrix& Q, const Vector& q, const Matrix& G, const Vector& h,
                             const Vector& dmask, double rho, Subproblem& out) {
  auto psi_of = [&](const Vector& v) { return (dmask.asDiagonal() * v).squaredNorm() - rho; };
  KktEval e0 = eval_kkt(Q, q, G, h, dmask, 0.0, false);
  if (e0.ok && psi_of(e0.v) <= 0.0) {
    out.v = e0.v;
    out.mu = e0.mu;
    out.nu = 0.0;
    return SecularOutcome::BallSlack;
  }
  double lo = 0.0, hi = 1.0;
  double psi_hi = 0.0;
  bool bracketed = false;
  bool any_consistent = e0.ok;
  for (int grow = 0; grow < 60; ++grow) {
    KktEval eh = eval_kkt(Q, q, G, h, dmask, hi, false);
    if (eh.ok) {
      any_consistent = true;
      psi_hi = psi_of(eh.v);
      if (psi_hi <= 0.0) {
        bracketed = true;
        break;
      }
      lo = hi;
    }
    hi *= 4.0;
    if (hi > 1e14) break;
  }
  if (!bracketed) return any_consistent ? SecularOutcome::Failed : SecularOutcome::Inconsistent;

  double nu = 0.5 * (lo + hi);
  for (int it = 0; it < 80; ++it) {
    KktEval em = eval_kkt(Q, q, G, h, dmask, nu, true);
    if (!em.ok) {
      nu = 0.5 * (nu + hi);  // nudge off an isolated singular point
      continue;
    }
    const double psi = psi_of(em.v);
    if (std::abs(psi) <= 1e-12 * std::max(1.0, rho) || (hi - lo) <= 1e-14 * std::max(1.0, hi)) {
      out.v = em.v;
      out.mu = em.mu;
      out.nu = nu;
      return SecularOutcome::Root;
    }
    if (psi > 0.0) lo = nu; else hi = nu;
    const double dpsi = 2.0 * Vector(dmask.asDiagonal() * em.v).dot(em.dv);
    double next = (dpsi < -1e-300) ? nu - psi / dpsi : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    nu = next;
  }
  KktEval ef = eval_kkt(Q, q, G, h, dmask, hi, false);
  if (ef.ok) {
    out.v = ef.v;
    out.mu = ef.mu;
    out.nu = hi;
    return SecularOutcome::Root;
  }
  return SecularOutcome::Failed;
}

double row_value(const BallQp& qp, std::size_t r, const Vector& v) {
  return qp.rows[r].dot(v);
}

bool point_feasible(const BallQp& qp, const Vector& v, double tol) {
  for (std::size_t r = 0; r < qp.rows.size(); ++r) {
    const double val = row_value(qp, r, v);
    switch (qp.sense[r]) {
      case RowSense::LE: if (val > qp.rhs[r] + tol) return false; break;
      case RowSense::GE: if (val < qp.rhs[r] - tol) return false; break;
      case RowSense::EQ: if (std::abs(val - qp.rhs[r]) > tol) return false; break;
    }
  }
  if (qp.has_ball()) {
    double s = 0.0;
    for (Index j : qp.ball_vars) s += v[j] * v[j];
    if (s > qp.ball_rho + tol) return false;
  }
  return true;
}

}  // namespace

QpResult solve_ball_qp(const BallQp& qp, const Tolerances& tols) {
  QpResult res;
  const Index n = qp.n;
  const std::size_t m = qp.rows.size();
  const Vector dmask = ball_mask(qp);

  // Feasible start: caller hint, else LP phase 1, else pull into the ball.
  Vector v;
  if (qp.start && qp.start->size() == n && point_feasible(qp, *qp.start, tols.feasibility)) {
    v = *qp.start;
  } else {
    LinearProgram ph(n);
    for (std::size_t r = 0; r < m; ++r) ph.add_row(qp.rows[r], qp.sense[r], qp.rhs[r]);
    const LpResult lr = solve_lp(ph, tols);
    if (lr.kind == LpStatusKind::Infeasible) {
      res.kind = QpStatusKind::Infeasible;
      res.farkas = lr.farkas;
      res.note = "linear rows inconsistent";
      return res;
    }
    if (lr.kind != LpStatusKind::Optimal) {
      res.kind = QpStatusKind::IterationLimit;
      res.note = "phase-1 LP failed";
      return res;
    }
    v = lr.v;
    if (qp.has_ball() && !point_feasible(qp, v, tols.feasibility)) {
      BallQp pull(n);
      pull.Q = Matrix(dmask.asDiagonal());
      pull.q = Vector::Zero(n);
      pull.rows = qp.rows;
      pull.rhs = qp.rhs;
      pull.sense = qp.sense;
      pull.start = v;
      const QpResult pr = solve_ball_qp(pull, tols);
      if (pr.kind != QpStatusKind::Optimal) {
        res.kind = QpStatusKind::IterationLimit;
        res.note = "ball phase 1 failed";
        return res;
      }
      if (pr.value > qp.ball_rho + tols.feasibility) {
        res.kind = QpStatusKind::Infeasible;
        res.note = "ball incompatible with linear rows";
        return res;
      }
      v = pr.v;
    }
  }

  // Working set: all EQ rows permanently, actives discovered on the way.
  std::vector<char> in_ws(m, 0);
  for (std::size_t r = 0; r < m; ++r) {
    if (qp.sense[r] == RowSense::EQ) in_ws[r] = 1;
    else if (std::abs(row_value(qp, r, v) - qp.rhs[r]) <= tols.feasibility) in_ws[r] = 1;
  }
  auto ball_norm2 = [&](const Vector& p) {
    double s = 0.0;
    for (Index j : qp.ball_vars) s += p[j] * p[j];
    return s;
  };
  bool ball_active = qp.has_ball() && ball_norm2(v) >= qp.ball_rho - tols.feasibility;

  const long iter_cap = 200 + 30L * static_cast<long>(m + n);
  for (long it = 0; it < iter_cap; ++it) {
    res.iterations = it + 1;
    std::vector<std::size_t> ws;
    for (std::size_t r = 0; r < m; ++r)
      if (in_ws[r]) ws.push_back(r);
    Matrix G(static_cast<Index>(ws.size()), n);
    Vector h(static_cast<Index>(ws.size()));
    for (std::size_t k = 0; k < ws.size(); ++k) {
      G.row(static_cast<Index>(k)) = qp.rows[ws[k]].transpose();
      h[static_cast<Index>(k)] = qp.rhs[ws[k]];
    }

    Subproblem sp;
    bool have_point = false;
    if (ball_active) {
      switch (solve_secular(qp.Q, qp.q, G, h, dmask, qp.ball_rho, sp)) {
        case SecularOutcome::Root:
          have_point = true;
          break;
        case SecularOutcome::BallSlack:
          ball_active = false;
          have_point = true;
          sp.nu = 0.0;
          break;
        case SecularOutcome::Inconsistent: {
          // Unbounded inside the ball: descend along a direction that keeps
          // the ball coordinates and the working set fixed.
          const Vector grad = 2.0 * (qp.Q * v + qp.q);
          Vector ray;
          if (!descent_ray(qp.Q, grad, G, dmask, 1.0, ray)) {
            res.kind = QpStatusKind::IterationLimit;
            res.note = "secular solve failed";
            return res;
          }
          if (grad.dot(ray) > 0.0) ray = -ray;
          sp.unbounded = true;
          sp.ray = ray;
          break;
        }
        case SecularOutcome::Failed:
          res.kind = QpStatusKind::IterationLimit;
          res.note = "secular solve failed";
          return res;
      }
    } else {
      const KktEval e = eval_kkt(qp.Q, qp.q, G, h, dmask, 0.0, false);
      if (e.ok) {
        sp.v = e.v;
        sp.mu = e.mu;
        sp.nu = 0.0;
        have_point = true;
      } else {
        const Vector grad = 2.0 * (qp.Q * v + qp.q);
        Vector ray;
        if (!descent_ray(qp.Q, grad, G, Vector::Zero(n), 0.0, ray)) {
          res.kind = QpStatusKind::IterationLimit;
          res.note = "KKT solve failed";
          return res;
        }
        if (grad.dot(ray) > 0.0) ray = -ray;
        sp.unbounded = true;
        sp.ray = ray;
      }
    }

    Vector p;
    bool ray_step = false;
    if (have_point) {
      p = sp.v - v;
      if (p.lpNorm<Eigen::Infinity>() <= kStepTol * (1.0 + v.lpNorm<Eigen::Infinity>())) {
        // Stationary on the working set: check multiplier signs.
        double worst = tols.optimality;
        int worst_idx = -1;
        for (std::size_t k = 0; k < ws.size(); ++k) {
          const std::size_t r = ws[k];
          if (qp.sense[r] == RowSense::EQ) continue;
          const double mu = sp.mu[static_cast<Index>(k)];
          const double viol = qp.sense[r] == RowSense::LE ? -mu : mu;
          if (viol > worst) {
            worst = viol;
            worst_idx = static_cast<int>(r);
          }
        }
        if (worst_idx < 0) {
          res.kind = QpStatusKind::Optimal;
          res.v = v;
          res.value = v.dot(qp.Q * v) + 2.0 * qp.q.dot(v) + qp.c;
          res.row_duals = Vector::Zero(static_cast<Index>(m));
          for (std::size_t k = 0; k < ws.size(); ++k)
            res.row_duals[static_cast<Index>(ws[k])] = sp.mu[static_cast<Index>(k)];
          res.ball_dual = ball_active ? sp.nu : 0.0;
          Vector kkt = 2.0 * (qp.Q * v + qp.q);
          for (std::size_t k = 0; k < ws.size(); ++k)
            kkt += sp.mu[static_cast<Index>(k)] * qp.rows[ws[k]];
          if (ball_active) kkt += 2.0 * sp.nu * Vector(dmask.asDiagonal() * v);
          res.kkt_residual = kkt.lpNorm<Eigen::Infinity>();
          return res;
        }
        in_ws[static_cast<std::size_t>(worst_idx)] = 0;
        continue;
      }
    } else {
      p = sp.ray;
      ray_step = true;
    }

    // Ratio test from v along p against inactive rows and the ball.
    double sigma = ray_step ? unbounded() : 1.0;
    int blocker = -1;  // -2 encodes the ball
    for (std::size_t r = 0; r < m; ++r) {
      if (in_ws[r]) continue;
      const double ap = qp.rows[r].dot(p);
      double cand = unbounded();
      if (qp.sense[r] == RowSense::LE && ap > 1e-12) cand = (qp.rhs[r] - row_value(qp, r, v)) / ap;
      else if (qp.sense[r] == RowSense::GE && ap < -1e-12)
        cand = (qp.rhs[r] - row_value(qp, r, v)) / ap;
      if (is_unbounded(cand) || cand < -1e-9) continue;
      cand = std::max(cand, 0.0);
      if (cand < sigma - 1e-12) {
        sigma = cand;
        blocker = static_cast<int>(r);
      }
    }
    if (qp.has_ball() && !ball_active) {
      const double a2 = ball_norm2(p);
      if (a2 > 1e-14) {
        double bb = 0.0;
        for (Index j : qp.ball_vars) bb += v[j] * p[j];
        const double cc = ball_norm2(v) - qp.ball_rho;
        const double disc = bb * bb - a2 * cc;
        if (disc >= 0.0) {
          const double root = (-bb + std::sqrt(disc)) / a2;
          if (root >= -1e-9 && root < sigma - 1e-12) {
            sigma = std::max(root, 0.0);
            blocker = -2;
          }
        }
      }
    }
    if (ray_step && is_unbounded(sigma)) {
      res.kind = QpStatusKind::Unbounded;
      res.ray = p;
      res.v = v;
      res.note = "objective decreases along returned ray";
      return res;
    }
    v += sigma * p;
    if (blocker == -2) ball_active = true;
    else if (blocker >= 0) in_ws[static_cast<std::size_t>(blocker)] = 1;
  }
  res.kind = QpStatusKind::IterationLimit;
  res.note = "active-set iteration cap";
  return res;
}

}  // namespace copo
