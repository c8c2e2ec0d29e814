#include "copo/quadratic_dual.hpp"

#include "copo/ball_qp.hpp"
#include "copo/copositivity.hpp"
#include "copo/cut_pool.hpp"
#include "copo/linear_program.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <utility>

namespace copo {

namespace {

constexpr double kTrust = 1e6;
constexpr int kSeedCount = 20;
constexpr std::uint64_t kSeed = 20250814;

// Packed upper triangle of the symmetric parameter-block matrix W, ordered
// (0,0), (0,1), ..., (0,n-1), (1,1), ..., (n-1,n-1).
struct TriLayout {
  Index n = 0;
  Index size() const { return n * (n + 1) / 2; }
  Index at(Index i, Index j) const { return i * n - i * (i - 1) / 2 + (j - i); }  // i <= j
};

// Row coefficients of v'Wv over the packed triangle (also the coefficients
// of u_x'W u_x in a cut row).
Vector quad_coeffs(const TriLayout& tri, const Vector& v) {
  Vector c(tri.size());
  for (Index i = 0; i < tri.n; ++i)
    for (Index j = i; j < tri.n; ++j) c(tri.at(i, j)) = (i == j) ? v(i) * v(i) : 2.0 * v(i) * v(j);
  return c;
}

Matrix unpack_tri(const TriLayout& tri, const Vector& packed) {
  Matrix W(tri.n, tri.n);
  for (Index i = 0; i < tri.n; ++i)
    for (Index j = i; j < tri.n; ++j) W(i, j) = W(j, i) = packed(tri.at(i, j));
  return W;
}

// Adjoint embedding of (w, W) into the lifted space: border row/column w/2
// against the parameter block, W inside it, zeros elsewhere.
Matrix border_embed(Index dim, Index n_x, const Vector& w, const Matrix* W) {
  Matrix B = Matrix::Zero(dim, dim);
  B.block(0, 1, 1, n_x) = 0.5 * w.transpose();
  B.block(1, 0, n_x, 1) = 0.5 * w;
  if (W) B.block(1, 1, n_x, n_x) = *W;
  return B;
}

Matrix dual_matrix(const LiftedProgram& lp, const Vector& lambda, const Vector& w,
                   const Matrix* W) {
  Matrix M = lp.Qhat;
  for (std::size_t k = 0; k < lp.constraints.size(); ++k)
    M -= lambda(static_cast<Index>(k)) * lp.constraints[k].H;
  M -= border_embed(lp.dim, lp.n_x, w, W);
  return M;
}

// Cut row over the stacked variables (lambda | w | W-triangle?) for the
// ground point u:  sum_k lambda_k h_k(u) + w'u_x (+ u_x'W u_x) <= fhat(u).
Vector cut_row(const LiftedProgram& lp, const TriLayout* tri, const Vector& u) {
  const Index K = static_cast<Index>(lp.constraints.size());
  const Index nv = K + lp.n_x + (tri ? tri->size() : 0);
  Vector row(nv);
  for (Index k = 0; k < K; ++k) row(k) = constraint_value(lp.constraints[k], u);
  row.segment(K, lp.n_x) = u.head(lp.n_x);
  if (tri) row.tail(tri->size()) = quad_coeffs(*tri, u.head(lp.n_x));
  return row;
}

bool at_trust_box(const Vector& v) { return v.cwiseAbs().maxCoeff() >= kTrust * (1.0 - 1e-7); }

// Pull an at-trust LP vertex back toward the minimum-norm point of its
// optimal face. Landing on the box is ambiguous: structural identities of
// the ground set (homogenisation, simplex-type equalities) make whole dual
// lines objective- and cut-neutral, so a vertex can sit at 1e6 scale while
// the face also contains perfectly moderate points. The rows plus a value
// anchor pin the face; the norm objective discards the neutral directions.
// On QP failure the vertex is returned unchanged.
Vector recover_moderate(const LinearProgram& m, const Vector& vertex) {
  BallQp qp(m.n);
  qp.Q = Matrix::Identity(m.n, m.n);
  for (Index r = 0; r < m.m(); ++r) qp.add_row(m.rows[r], m.sense[r], m.rhs[r]);
  for (Index j = 0; j < m.n; ++j) {
    const Vector e = Vector::Unit(m.n, j);
    qp.add_row(e, RowSense::LE, m.hi(j));
    qp.add_row(-e, RowSense::LE, -m.lo(j));
  }
  const double value = m.c.dot(vertex);
  qp.add_row(m.c, RowSense::GE, value - 1e-9 * (1.0 + std::abs(value)));
  qp.start = vertex;  // feasible by construction
  const QpResult rq = solve_ball_qp(qp);
  if (std::getenv("COPO_DEBUG_QD") && rq.kind != QpStatusKind::Optimal)
    std::fprintf(stderr, "[recover-fail] kind=%d note='%s'\n", (int)rq.kind, rq.note.c_str());
  return rq.kind == QpStatusKind::Optimal ? rq.v : vertex;
}

void validate_parameter(const LiftedProgram& lp, const Vector& x, const char* who) {
  if (x.size() != lp.n_x) throw std::invalid_argument(std::string(who) + ": bad x dimension");
}

}  // namespace

AffineDualOutcome evaluate_lifted_envelope(const LiftedProgram& lp, const Vector& x, double tol,
                                           int max_iter, CutPool* shared_pool) {
  validate_parameter(lp, x, "evaluate_lifted_envelope");
  const Index K = static_cast<Index>(lp.constraints.size());
  const Index nv = K + lp.n_x;

  CutPool local_pool(lp.ground_dim());
  CutPool& pool = shared_pool ? *shared_pool : local_pool;
  if (pool.ground_dim() != lp.ground_dim())
    throw std::invalid_argument("evaluate_lifted_envelope: pool dimension mismatch");
  if (pool.size() == 0) seed_cut_pool(pool, lp.ground, kSeedCount, kSeed);

  AffineDualOutcome out;
  double oracle_tol = tol;
  bool retried_deeper = false;
  bool pinned = false;
  for (int it = 0; it < max_iter; ++it) {
    LinearProgram m(nv);
    m.c.head(K) = lp.b();
    m.c.segment(K, lp.n_x) = x;
    m.lo.setConstant(-kTrust);
    m.hi.setConstant(kTrust);
    for (const Vector& z : pool.cuts()) {
      const Vector u = z.tail(lp.ground_dim());
      m.add_row(cut_row(lp, nullptr, u), RowSense::LE, objective_value(lp, u));
    }
    const LpResult lr = solve_lp(m);
    if (lr.kind != LpStatusKind::Optimal) {
      out.note = "master LP did not solve to optimality";
      return out;
    }
    Vector v = lr.v;
    const bool was_pinned = at_trust_box(v);
    if (was_pinned) v = recover_moderate(m, v);
    pinned = at_trust_box(v);
    out.lambda = v.head(K);
    out.w = v.segment(K, lp.n_x);
    const double master_value = lp.b().dot(out.lambda) + out.w.dot(x);
    const Matrix M = dual_matrix(lp, out.lambda, out.w, nullptr);
    if (std::getenv("COPO_DEBUG_QD")) {
      std::fprintf(stderr, "[aff-pre] it=%d lpval=%g raw_pin=%d pin=%d vinf=%g mval=%g Minf=%g\n",
                   it, lr.value, (int)was_pinned, (int)pinned, v.cwiseAbs().maxCoeff(),
                   master_value, M.cwiseAbs().maxCoeff());
      std::fprintf(stderr, "[aff-M] %.17g %.17g %.17g %.17g %.17g %.17g\n", M(0, 0), M(0, 1),
                   M(0, 2), M(1, 1), M(1, 2), M(2, 2));
    }
    const auto t0 = std::chrono::steady_clock::now();
    const CopositivityResult cr = check_set_copositivity(M, lp.ground, oracle_tol);
    if (std::getenv("COPO_DEBUG_QD"))
      std::fprintf(stderr,
                   "[aff] it=%d lpval=%g raw_pin=%d pin=%d vinf=%g mval=%g Minf=%g nodes=%ld "
                   "nn=%d viol=%g dt=%.2fs\n",
                   it, lr.value, (int)was_pinned, (int)pinned, v.cwiseAbs().maxCoeff(),
                   master_value, M.cwiseAbs().maxCoeff(), cr.nodes, (int)cr.nonnegative,
                   cr.nonnegative ? 0.0 : cr.violation_value,
                   std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    out.trace.push_back(
        {it, master_value, cr.nonnegative ? cr.min_lower_bound : cr.violation_value});
    if (cr.nonnegative) {
      if (pinned) {
        out.note = "oracle accepted a trust-scale point; refusing to certify it";
        return out;
      }
      out.kind = DualStatusKind::Value;
      out.value = master_value;
      if (!cr.decisive) out.note = "oracle verdict within its decision band";
      return out;
    }
    if (pool.add(lp.ground, lift_point(cr.violator)) == AddCutOutcome::Added) continue;
    if (!retried_deeper) {
      retried_deeper = true;
      oracle_tol = tol / 10.0;
      continue;
    }
    out.note = "separation stalled on a repeated violator";
    return out;
  }
  if (pinned) {
    out.kind = DualStatusKind::Unbounded;
    out.note = "master stayed at the trust region through the separation budget; "
               "the dual value appears to diverge at this point";
  } else {
    out.note = "iteration budget exhausted before the oracle accepted the master point";
  }
  return out;
}

QuadraticDualOutcome solve_quadratic_dual(const LiftedProgram& lp, const Vector& x, double tol,
                                          int max_iter) {
  validate_parameter(lp, x, "solve_quadratic_dual");
  const Index K = static_cast<Index>(lp.constraints.size());
  const TriLayout tri{lp.n_x};
  const Index nv = K + lp.n_x + tri.size();

  CutPool pool(lp.ground_dim());
  seed_cut_pool(pool, lp.ground, kSeedCount, kSeed);

  QuadraticDualOutcome out;
  double oracle_tol = tol;
  bool retried_deeper = false;
  bool pinned = false;
  for (int it = 0; it < max_iter; ++it) {
    LinearProgram m(nv);
    m.c.head(K) = lp.b();
    m.c.segment(K, lp.n_x) = x;
    m.c.tail(tri.size()) = quad_coeffs(tri, x);
    m.lo.setConstant(-kTrust);
    m.hi.setConstant(kTrust);
    for (const Vector& z : pool.cuts()) {
      const Vector u = z.tail(lp.ground_dim());
      m.add_row(cut_row(lp, &tri, u), RowSense::LE, objective_value(lp, u));
    }
    const LpResult lr = solve_lp(m);
    if (lr.kind != LpStatusKind::Optimal) {
      out.note = "master LP did not solve to optimality";
      return out;
    }
    Vector v = lr.v;
    if (at_trust_box(v)) v = recover_moderate(m, v);
    pinned = at_trust_box(v);
    out.cert.lambda = v.head(K);
    out.cert.w = v.segment(K, lp.n_x);
    out.cert.W = unpack_tri(tri, v.tail(tri.size()));
    out.cert.nu = lp.b().dot(out.cert.lambda);
    const double master_value = certificate_value(out.cert, x);
    const Matrix M = dual_matrix(lp, out.cert.lambda, out.cert.w, &out.cert.W);
    const CopositivityResult cr = check_set_copositivity(M, lp.ground, oracle_tol);
    out.trace.push_back(
        {it, master_value, cr.nonnegative ? cr.min_lower_bound : cr.violation_value});
    if (cr.nonnegative) {
      if (pinned) {
        out.note = "oracle accepted a trust-scale point; refusing to certify it";
        return out;
      }
      out.kind = DualStatusKind::Value;
      out.value = master_value;
      if (!cr.decisive) out.note = "oracle verdict within its decision band";
      return out;
    }
    if (pool.add(lp.ground, lift_point(cr.violator)) == AddCutOutcome::Added) continue;
    if (!retried_deeper) {
      retried_deeper = true;
      oracle_tol = tol / 10.0;
      continue;
    }
    out.note = "separation stalled on a repeated violator";
    return out;
  }
  if (pinned) {
    out.kind = DualStatusKind::Unbounded;
    out.note = "master stayed at the trust region through the separation budget; "
               "the dual value appears to diverge at this point";
  } else {
    out.note = "iteration budget exhausted before the oracle accepted the master point";
  }
  return out;
}

QuadraticDualOutcome search_convex_quadratic(const LiftedProgram& lp, const Vector& x1,
                                             double target, const Vector& x2, double tol,
                                             int max_iter) {
  validate_parameter(lp, x1, "search_convex_quadratic");
  validate_parameter(lp, x2, "search_convex_quadratic");
  const Index K = static_cast<Index>(lp.constraints.size());
  const TriLayout tri{lp.n_x};
  const Index nv = K + lp.n_x + tri.size();

  CutPool pool(lp.ground_dim());
  seed_cut_pool(pool, lp.ground, kSeedCount, kSeed);
  std::vector<Vector> eigen_cuts;  // directions v with the row v'Wv >= 0

  QuadraticDualOutcome out;
  double oracle_tol = tol;
  bool retried_deeper = false;
  bool pinned = false;
  for (int it = 0; it < max_iter; ++it) {
    LinearProgram m(nv);
    m.c.tail(tri.size()) = quad_coeffs(tri, x2);
    m.lo.setConstant(-kTrust);
    m.hi.setConstant(kTrust);
    for (const Vector& z : pool.cuts()) {
      const Vector u = z.tail(lp.ground_dim());
      m.add_row(cut_row(lp, &tri, u), RowSense::LE, objective_value(lp, u));
    }
    // Pin the induced underestimator to `target` at x1.
    Vector pin(nv);
    pin.head(K) = lp.b();
    pin.segment(K, lp.n_x) = x1;
    pin.tail(tri.size()) = quad_coeffs(tri, x1);
    m.add_row(std::move(pin), RowSense::EQ, target);
    for (const Vector& v : eigen_cuts) {
      Vector row = Vector::Zero(nv);
      row.tail(tri.size()) = quad_coeffs(tri, v);
      m.add_row(std::move(row), RowSense::GE, 0.0);
    }
    const LpResult lr = solve_lp(m);
    if (lr.kind == LpStatusKind::Infeasible) {
      out.kind = DualStatusKind::Infeasible;
      out.note = "no dual certificate attains the pinned value at x1";
      return out;
    }
    if (lr.kind != LpStatusKind::Optimal) {
      out.note = "master LP did not solve to optimality";
      return out;
    }
    Vector v = lr.v;
    if (at_trust_box(v)) v = recover_moderate(m, v);
    pinned = at_trust_box(v);
    out.cert.lambda = v.head(K);
    out.cert.w = v.segment(K, lp.n_x);
    out.cert.W = unpack_tri(tri, v.tail(tri.size()));
    out.cert.nu = lp.b().dot(out.cert.lambda);
    const double master_value = x2.dot(out.cert.W * x2);
    // Convexity first (cheap), copositivity second (exact).
    Eigen::SelfAdjointEigenSolver<Matrix> eig(out.cert.W);
    const double scale = std::max(1.0, out.cert.W.cwiseAbs().maxCoeff());
    if (eig.eigenvalues()(0) < -1e-8 * scale) {
      eigen_cuts.push_back(eig.eigenvectors().col(0));
      out.trace.push_back({it, master_value, eig.eigenvalues()(0)});
      continue;
    }
    const Matrix M = dual_matrix(lp, out.cert.lambda, out.cert.w, &out.cert.W);
    const CopositivityResult cr = check_set_copositivity(M, lp.ground, oracle_tol);
    out.trace.push_back(
        {it, master_value, cr.nonnegative ? cr.min_lower_bound : cr.violation_value});
    if (cr.nonnegative) {
      if (pinned) {
        out.note = "oracle accepted a trust-scale point; refusing to certify it";
        return out;
      }
      out.kind = DualStatusKind::Value;
      out.value = master_value;
      if (!cr.decisive) out.note = "oracle verdict within its decision band";
      return out;
    }
    if (pool.add(lp.ground, lift_point(cr.violator)) == AddCutOutcome::Added) continue;
    if (!retried_deeper) {
      retried_deeper = true;
      oracle_tol = tol / 10.0;
      continue;
    }
    out.note = "separation stalled on a repeated violator";
    return out;
  }
  if (pinned) {
    out.kind = DualStatusKind::Unbounded;
    out.note = "master stayed at the trust region through the separation budget; "
               "the curvature search appears to diverge";
  } else {
    out.note = "iteration budget exhausted before the oracle accepted the master point";
  }
  return out;
}

}  // namespace copo
