#include "copo/benders.hpp"

#include "copo/global_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <thread>
#include <utility>

namespace copo {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool same_cert(const EnvelopeCertificate& a, const EnvelopeCertificate& b) {
  return std::abs(a.alpha - b.alpha) <= 1e-9 && a.w.size() == b.w.size() &&
         (a.w - b.w).cwiseAbs().maxCoeff() <= 1e-9 && std::abs(a.epsilon - b.epsilon) <= 1e-12;
}

bool push_unique(std::vector<EnvelopeCertificate>& cuts, const EnvelopeCertificate& cert) {
  for (const EnvelopeCertificate& c : cuts)
    if (same_cert(c, cert)) return false;
  cuts.push_back(cert);
  return true;
}

// Outcome of one block's evaluation round, merged deterministically by index.
struct BlockRound {
  bool has_value = false;
  double value = 0.0;
  bool has_opt_cut = false;
  EnvelopeCertificate opt_cut;
  bool has_feas_cut = false;
  EnvelopeCertificate feas_cut;
  Vector incumbent;
  double seconds = 0.0;
  std::string note;
};

// Evaluate one block at its slice, escalating exactly once through the
// doubled regularisation and then the ray search before giving up.
BlockRound evaluate_block(EnvelopeEngine& engine, const Vector& xi, double epsilon) {
  BlockRound round;
  const auto t0 = Clock::now();
  EnvelopeOutcome out = engine.evaluate(xi, epsilon);
  if (out.kind == EnvelopeStatusKind::UnboundedRay)
    out = engine.evaluate(xi, 2.0 * epsilon);
  if (out.kind == EnvelopeStatusKind::UnboundedRay) {
    EnvelopeOutcome ray = engine.improving_ray(xi);
    if (ray.kind == EnvelopeStatusKind::Value) {
      round.has_feas_cut = true;
      round.feas_cut = ray.cert;
      if (ray.last_incumbent.size() > 0) round.incumbent = ray.last_incumbent;
      round.seconds = seconds_since(t0);
      return round;
    }
    // No ray found: the point is not strictly separable after all, so the
    // grown pool should now make the evaluation terminate.
    out = engine.evaluate(xi, epsilon);
  }
  if (out.kind == EnvelopeStatusKind::Value) {
    round.has_value = true;
    round.value = out.value;
    round.has_opt_cut = true;
    round.opt_cut = out.cert;
  } else {
    round.note = out.note.empty() ? "block evaluation failed" : out.note;
  }
  if (out.last_incumbent.size() > 0) round.incumbent = out.last_incumbent;
  round.seconds = seconds_since(t0);
  return round;
}

}  // namespace

MasterSolution solve_benders_master(const BlockQcqpInstance& inst,
                                    const std::vector<std::vector<EnvelopeCertificate>>& opt_cuts,
                                    const std::vector<std::vector<EnvelopeCertificate>>& feas_cuts,
                                    const std::optional<Vector>& warm) {
  const Index N = inst.S * inst.n;
  const Index nv = N + inst.S;
  BallQp qp(nv);
  qp.Q.topLeftCorner(N, N) = inst.A;
  qp.q.head(N) = inst.a;
  qp.q.tail(inst.S).setConstant(0.5);  // 2 q'v contributes sum_i phi_i
  qp.ball_vars.resize(N);
  for (Index j = 0; j < N; ++j) qp.ball_vars[j] = j;
  qp.ball_rho = inst.r;

  for (Index i = 0; i < inst.S; ++i) {
    for (const EnvelopeCertificate& cert : opt_cuts[i]) {
      Vector row = Vector::Zero(nv);
      row.segment(i * inst.n, inst.n) = -2.0 * cert.w;
      row(N + i) = -1.0;
      qp.add_row(std::move(row), RowSense::LE,
                 cert.alpha + 2.0 * cert.epsilon * cert.w.norm());
    }
    for (const EnvelopeCertificate& cert : feas_cuts[i]) {
      Vector row = Vector::Zero(nv);
      row.segment(i * inst.n, inst.n) = -2.0 * cert.w;
      qp.add_row(std::move(row), RowSense::LE, cert.alpha);
    }
    const double floor_i = -(inst.blocks[i].A.norm() * inst.r + 1.0);
    qp.add_row(Vector::Unit(nv, N + i), RowSense::GE, floor_i);
    if (inst.blocks[i].F.nonneg)
      for (Index j = 0; j < inst.n; ++j)
        qp.add_row(Vector::Unit(nv, i * inst.n + j), RowSense::GE, 0.0);
  }
  if (warm && warm->size() == nv) qp.start = *warm;

  const QpResult qr = solve_ball_qp(qp);
  MasterSolution sol;
  sol.kind = qr.kind;
  if (qr.kind == QpStatusKind::Optimal) {
    sol.x = qr.v.head(N);
    sol.phi = qr.v.tail(inst.S);
    sol.value = qr.value;
  }
  return sol;
}

BendersResult run_benders(const BlockQcqpInstance& inst, const BendersConfig& cfg) {
  validate_instance(inst);
  const Index S = inst.S;
  const Index n = inst.n;
  const Index N = S * n;
  const auto t_start = Clock::now();

  std::vector<EnvelopeEngine> engines;
  engines.reserve(S);
  for (Index i = 0; i < S; ++i) {
    EnvelopeConfig ec;
    ec.tol = cfg.cop_tol;
    ec.max_iter = cfg.sub_max_iter;
    ec.witness = inst.blocks[i].witness;
    ec.seed = cfg.seed + static_cast<std::uint64_t>(i);
    engines.emplace_back(inst.blocks[i].A, inst.blocks[i].F, std::move(ec));
  }

  BendersResult res;
  res.opt_cuts.resize(S);
  res.feas_cuts.resize(S);
  res.lower_bound = -unbounded();
  res.upper_bound = unbounded();

  const QuadraticForm mono_obj = monolithic_objective(inst);
  const BlockFeasibleSet mono_set = monolithic_set(inst);

  auto consider_upper = [&](const Vector& z) {
    if (z.size() != N || !check_membership(mono_set, z)) return;
    const double val = eval_quadratic(mono_obj, z);
    if (val < res.upper_bound) {
      res.upper_bound = val;
      res.best_point = z;
    }
  };

  // One evaluation round at x: runs the blocks (threaded when asked), then
  // merges cuts and the upper-bound heuristic in block order.
  auto run_round = [&](const Vector& x, Vector& values, std::vector<bool>& valued,
                       double& par_seconds, double& sum_seconds, std::string& fail_note) {
    std::vector<BlockRound> rounds(S);
    const int jobs = std::max(1, cfg.jobs);
    for (Index base = 0; base < S; base += jobs) {
      const Index batch = std::min<Index>(jobs, S - base);
      if (batch == 1) {
        rounds[base] = evaluate_block(engines[base], block_slice(inst, x, base), cfg.epsilon);
      } else {
        std::vector<std::thread> pool;
        pool.reserve(batch);
        for (Index t = 0; t < batch; ++t)
          pool.emplace_back([&, t] {
            rounds[base + t] =
                evaluate_block(engines[base + t], block_slice(inst, x, base + t), cfg.epsilon);
          });
        for (std::thread& th : pool) th.join();
      }
    }
    Vector incumbent_cat(N);
    bool all_incumbents = true;
    par_seconds = 0.0;
    sum_seconds = 0.0;
    for (Index i = 0; i < S; ++i) {
      const BlockRound& r = rounds[i];
      par_seconds = std::max(par_seconds, r.seconds);
      sum_seconds += r.seconds;
      if (r.has_opt_cut) push_unique(res.opt_cuts[i], r.opt_cut);
      if (r.has_feas_cut) push_unique(res.feas_cuts[i], r.feas_cut);
      valued[i] = r.has_value;
      values[i] = r.has_value ? r.value : 0.0;
      if (!r.note.empty()) {
        std::ostringstream os;
        os << "block " << i << ": " << r.note;
        fail_note = os.str();
      }
      if (r.incumbent.size() == n)
        incumbent_cat.segment(i * n, n) = r.incumbent;
      else
        all_incumbents = false;
    }
    if (all_incumbents && S > 0) consider_upper(incumbent_cat);
  };

  // Bootstrap cuts at the concatenated block witnesses before any master.
  Vector probe(N);
  for (Index i = 0; i < S; ++i) {
    if (inst.blocks[i].witness.size() == n) {
      probe.segment(i * n, n) = inst.blocks[i].witness;
    } else {
      const QuadraticForm zero{Matrix::Zero(n, n), Vector::Zero(n), 0.0};
      GlobalConfig probe_cfg;
      probe_cfg.stop_at_first_feasible = true;
      const GlobalResult gr = solve_global(zero, inst.blocks[i].F, probe_cfg);
      if (gr.kind == GlobalStatusKind::Infeasible)
        throw std::runtime_error("run_benders: block ground set is empty");
      probe.segment(i * n, n) = gr.minimizer;
    }
  }
  {
    Vector values(S);
    std::vector<bool> valued(S, false);
    double par = 0.0, sum = 0.0;
    std::string note;
    run_round(probe, values, valued, par, sum, note);
    consider_upper(probe);
  }

  std::optional<Vector> warm;
  for (int k = 1; k <= cfg.max_iters; ++k) {
    const auto t_iter = Clock::now();
    const MasterSolution master = solve_benders_master(inst, res.opt_cuts, res.feas_cuts, warm);
    if (master.kind != QpStatusKind::Optimal) {
      res.note = "master did not solve to optimality";
      break;
    }
    res.lower_bound = std::max(res.lower_bound, master.value);
    res.x = master.x;
    res.phi = master.phi;
    Vector warm_next(N + S);
    warm_next.head(N) = master.x;
    warm_next.tail(S) = master.phi;
    warm = warm_next;

    Vector values(S);
    std::vector<bool> valued(S, false);
    double par_seconds = 0.0, sum_seconds = 0.0;
    std::string fail_note;
    run_round(master.x, values, valued, par_seconds, sum_seconds, fail_note);
    consider_upper(master.x);

    bool agree = true;
    for (Index i = 0; i < S; ++i) {
      if (!valued[i]) {
        agree = false;
        continue;
      }
      if (values[i] > master.phi(i) + cfg.stop_rel * std::max(1.0, std::abs(values[i])))
        agree = false;
    }
    const bool gap_closed = !is_unbounded(res.upper_bound) &&
                            res.upper_bound - res.lower_bound <=
                                cfg.stop_rel * std::max(1.0, std::abs(res.upper_bound));

    BendersIterRow row;
    row.k = k;
    row.lb = res.lower_bound;
    row.ub = res.upper_bound;
    row.gap = is_unbounded(res.upper_bound) ? unbounded() : res.upper_bound - res.lower_bound;
    for (Index i = 0; i < S; ++i) {
      row.n_opt_cuts += static_cast<int>(res.opt_cuts[i].size());
      row.n_feas_cuts += static_cast<int>(res.feas_cuts[i].size());
    }
    row.t_total_s = seconds_since(t_iter);
    row.t_blocks_s = sum_seconds;
    row.t_block_max_s = par_seconds;
    // Ideal wall time: the slowest block plus everything that stays serial
    // (master solve, merging). Clamped against clock granularity.
    row.t_parallel_s = std::max(par_seconds, par_seconds + (row.t_total_s - sum_seconds));
    res.history.push_back(row);

    if (agree || gap_closed) {
      res.converged = true;
      if (!fail_note.empty()) res.note = fail_note;
      break;
    }
    if (!fail_note.empty()) res.note = fail_note;
    if (cfg.time_limit_s > 0.0 && seconds_since(t_start) >= cfg.time_limit_s) {
      if (res.note.empty()) res.note = "time limit reached";
      break;
    }
  }
  if (!res.converged && res.note.empty()) res.note = "iteration limit reached";
  return res;
}

CutAudit audit_cuts(const BlockQcqpInstance& inst,
                    const std::vector<std::vector<EnvelopeCertificate>>& opt_cuts,
                    const std::vector<std::vector<EnvelopeCertificate>>& feas_cuts, int samples,
                    double tol, std::uint64_t seed) {
  CutAudit audit;
  for (Index i = 0; i < inst.S; ++i) {
    std::vector<Vector> pts =
        sample_feasible(inst.blocks[i].F, samples, seed + static_cast<std::uint64_t>(i));
    if (inst.blocks[i].witness.size() == inst.n) pts.push_back(inst.blocks[i].witness);
    for (const Vector& z : pts) {
      const double qz = z.dot(inst.blocks[i].A * z);
      if (i < static_cast<Index>(opt_cuts.size()))
        for (const EnvelopeCertificate& c : opt_cuts[i]) {
          const double slack = c.alpha + 2.0 * c.w.dot(z) + qz + 2.0 * c.epsilon * c.w.norm();
          audit.checked++;
          audit.worst_slack = std::min(audit.worst_slack, slack);
          if (slack < -tol) audit.violations++;
        }
      if (i < static_cast<Index>(feas_cuts.size()))
        for (const EnvelopeCertificate& c : feas_cuts[i]) {
          const double slack = c.alpha + 2.0 * c.w.dot(z);
          audit.checked++;
          audit.worst_slack = std::min(audit.worst_slack, slack);
          if (slack < -tol) audit.violations++;
        }
    }
  }
  return audit;
}

}  // namespace copo
