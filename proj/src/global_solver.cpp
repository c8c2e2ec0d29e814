#include "copo/global_solver.hpp"

#include "copo/linear_program.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>
#include <vector>

namespace copo {

namespace {

constexpr double kEigTol = 1e-10;

// Node relaxations are small and built from O(1)-scale data, so the simplex
// can afford tight tolerances here. The default 1e-7 leaves a ~1e-6 noise
// floor on node bounds, which blocks gap targets near that size.
constexpr Tolerances kNodeLpTols{1e-9, 1e-9};

// One lifted direction: variable s ~ (d'z)^2 with d unit norm. Directions are
// shared between equalities, the ball row and the concave objective split.
struct Direction {
  Vector d;
  bool is_unit_axis = false;
  Index axis = -1;
};

struct EqTerm {
  int dir = 0;       // direction index
  double coeff = 0.0;
};

// Static relaxation data built once per solve.
struct Model {
  const QuadraticForm* f = nullptr;
  const BlockFeasibleSet* F = nullptr;
  Index n = 0;
  std::vector<Direction> dirs;
  std::vector<std::vector<EqTerm>> eq_terms;  // one list per quadratic equality
  std::vector<LinearRow> lin_rows;            // rank-one equalities as linear rows
  std::vector<int> axis_dir;                  // axis l -> direction index (ball row)
  // Objective split: f = z'Qp z (tangents) + sum_k lam_k s_k (lam_k < 0) + 2q'z + c.
  Matrix Qp;
  bool has_convex = false;
  std::vector<EqTerm> concave_terms;
  // Global tangent pool for the convex split: eta >= g'z + off.
  std::vector<Vector> tangent_g;
  std::vector<double> tangent_off;
};

int find_or_add_direction(Model& mdl, const Vector& d_in) {
  Vector d = d_in;
  // Canonical sign: first nonzero component positive.
  for (Index i = 0; i < d.size(); ++i) {
    if (std::abs(d[i]) > 1e-12) {
      if (d[i] < 0) d = -d;
      break;
    }
  }
  d /= d.norm();
  for (std::size_t k = 0; k < mdl.dirs.size(); ++k)
    if ((mdl.dirs[k].d - d).lpNorm<Eigen::Infinity>() <= 1e-10) return static_cast<int>(k);
  Direction nd;
  nd.d = d;
  Index nz = -1;
  int nz_count = 0;
  for (Index i = 0; i < d.size(); ++i)
    if (std::abs(d[i]) > 1e-12) {
      nz = i;
      ++nz_count;
    }
  if (nz_count == 1 && std::abs(d[nz] - 1.0) <= 1e-12) {
    nd.is_unit_axis = true;
    nd.axis = nz;
  }
  mdl.dirs.push_back(std::move(nd));
  return static_cast<int>(mdl.dirs.size()) - 1;
}

Model build_model(const QuadraticForm& f, const BlockFeasibleSet& F) {
  Model mdl;
  mdl.f = &f;
  mdl.F = &F;
  mdl.n = F.n;
  // Every axis gets a square variable: the ball row needs them and they carry
  // the branching mismatch scores.
  mdl.axis_dir.resize(F.n);
  for (Index l = 0; l < F.n; ++l)
    mdl.axis_dir[l] = find_or_add_direction(mdl, Vector::Unit(F.n, l));

  for (const auto& eq : F.quad_eqs) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(eq.D);
    std::vector<EqTerm> terms;
    for (Index k = 0; k < F.n; ++k) {
      const double lam = es.eigenvalues()[k];
      if (lam <= kEigTol) continue;  // PSD: negatives are noise
      EqTerm t;
      t.dir = find_or_add_direction(mdl, es.eigenvectors().col(k));
      t.coeff = lam;
      terms.push_back(t);
    }
    mdl.eq_terms.push_back(std::move(terms));
  }
  mdl.lin_rows = rank_one_rows(F);

  Eigen::SelfAdjointEigenSolver<Matrix> es(f.Q);
  Matrix Qp = Matrix::Zero(F.n, F.n);
  for (Index k = 0; k < F.n; ++k) {
    const double lam = es.eigenvalues()[k];
    const Vector v = es.eigenvectors().col(k);
    if (lam > kEigTol) {
      Qp += lam * (v * v.transpose());
      mdl.has_convex = true;
    } else if (lam < -kEigTol) {
      EqTerm t;
      t.dir = find_or_add_direction(mdl, v);
      t.coeff = lam;
      mdl.concave_terms.push_back(t);
    }
  }
  mdl.Qp = std::move(Qp);
  return mdl;
}

void add_tangent(Model& mdl, const Vector& zhat) {
  if (!mdl.has_convex) return;
  const Vector g = 2.0 * (mdl.Qp * zhat);
  const double off = zhat.dot(mdl.Qp * zhat) - g.dot(zhat);
  for (std::size_t t = 0; t < mdl.tangent_g.size(); ++t)
    if ((mdl.tangent_g[t] - g).lpNorm<Eigen::Infinity>() <= 1e-10 &&
        std::abs(mdl.tangent_off[t] - off) <= 1e-10)
      return;
  if (mdl.tangent_g.size() >= 120) {
    mdl.tangent_g.erase(mdl.tangent_g.begin());
    mdl.tangent_off.erase(mdl.tangent_off.begin());
  }
  mdl.tangent_g.push_back(g);
  mdl.tangent_off.push_back(off);
}

void direction_interval(const Direction& dir, const Vector& lo, const Vector& hi, double& tlo,
                        double& thi) {
  tlo = 0.0;
  thi = 0.0;
  for (Index i = 0; i < lo.size(); ++i) {
    const double a = dir.d[i] * lo[i];
    const double b = dir.d[i] * hi[i];
    tlo += std::min(a, b);
    thi += std::max(a, b);
  }
}

// Node LP over variables [z | s_dirs | eta]. Objective optionally overridden
// for box-tightening probes.
struct NodeLp {
  LinearProgram lp;
  Index s_base = 0;
  Index eta = -1;
};

NodeLp build_node_lp(const Model& mdl, const Vector& lo, const Vector& hi) {
  const Index n = mdl.n;
  const Index K = static_cast<Index>(mdl.dirs.size());
  const bool eta = mdl.has_convex;
  NodeLp out;
  out.s_base = n;
  out.eta = eta ? n + K : -1;
  LinearProgram lp(n + K + (eta ? 1 : 0));
  for (Index l = 0; l < n; ++l) {
    lp.lo[l] = lo[l];
    lp.hi[l] = hi[l];
  }
  for (Index k = 0; k < K; ++k) {
    double tlo, thi;
    direction_interval(mdl.dirs[static_cast<std::size_t>(k)], lo, hi, tlo, thi);
    const Index sv = n + k;
    double slo = (tlo <= 0.0 && thi >= 0.0) ? 0.0 : std::min(tlo * tlo, thi * thi);
    double shi = std::max(tlo * tlo, thi * thi);
    lp.lo[sv] = slo;
    lp.hi[sv] = shi;
    const Vector& d = mdl.dirs[static_cast<std::size_t>(k)].d;
    // Tangent lower envelopes s >= 2 t0 (d'z) - t0^2 at both interval ends.
    for (const double t0 : {tlo, thi}) {
      Vector row = Vector::Zero(lp.n);
      row[sv] = 1.0;
      row.head(n) = -2.0 * t0 * d;
      lp.add_row(row, RowSense::GE, -t0 * t0);
    }
    // Secant upper envelope s <= (tlo + thi)(d'z) - tlo thi.
    Vector row = Vector::Zero(lp.n);
    row[sv] = 1.0;
    row.head(n) = -(tlo + thi) * d;
    lp.add_row(row, RowSense::LE, -tlo * thi);
  }
  for (std::size_t j = 0; j < mdl.eq_terms.size(); ++j) {
    Vector row = Vector::Zero(lp.n);
    for (const auto& t : mdl.eq_terms[j]) row[n + t.dir] = t.coeff;
    lp.add_row(row, RowSense::EQ, mdl.F->quad_eqs[j].rhs);
  }
  for (const auto& lr : mdl.lin_rows) {
    Vector row = Vector::Zero(lp.n);
    row.head(n) = lr.v;
    lp.add_row(row, RowSense::EQ, lr.s);
  }
  {
    Vector row = Vector::Zero(lp.n);
    for (Index l = 0; l < n; ++l) row[n + mdl.axis_dir[static_cast<std::size_t>(l)]] = 1.0;
    lp.add_row(row, RowSense::LE, mdl.F->ball_radius);
  }
  if (eta) {
    lp.lo[out.eta] = 0.0;  // convex split is PSD, so 0 underestimates it
    for (std::size_t t = 0; t < mdl.tangent_g.size(); ++t) {
      Vector row = Vector::Zero(lp.n);
      row[out.eta] = 1.0;
      row.head(n) = -mdl.tangent_g[t];
      lp.add_row(row, RowSense::GE, mdl.tangent_off[t]);
    }
    // Box-center tangent: keeps the epigraph error at O(width^2) so that
    // branching alone closes the convex split even when the pool stagnates.
    const Vector zc = 0.5 * (lo + hi);
    const Vector gc = 2.0 * (mdl.Qp * zc);
    Vector row = Vector::Zero(lp.n);
    row[out.eta] = 1.0;
    row.head(n) = -gc;
    lp.add_row(row, RowSense::GE, zc.dot(mdl.Qp * zc) - gc.dot(zc));
  }
  // Objective: minimize eta + sum lam_k s_k + 2 q'z (+c separately) -> maximize negation.
  Vector c = Vector::Zero(lp.n);
  c.head(n) = -2.0 * mdl.f->q;
  for (const auto& t : mdl.concave_terms) c[n + t.dir] -= t.coeff;
  if (eta) c[out.eta] = -1.0;
  lp.c = c;
  out.lp = std::move(lp);
  return out;
}

struct Node {
  Vector lo, hi;
  double bound;  // inherited valid lower bound
  long id;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;  // min-heap on bound
    return a.id > b.id;
  }
};

}  // namespace

GlobalResult solve_global(const QuadraticForm& f, const BlockFeasibleSet& F,
                          const GlobalConfig& cfg) {
  if (f.dim() != F.n) throw std::invalid_argument("solve_global: dimension mismatch");
  validate_set(F);
  Model mdl = build_model(f, F);

  GlobalResult res;
  res.upper = ExtendedValue::infinity();

  Vector lo, hi;
  coordinate_box(F, lo, hi);

  auto try_incumbent = [&](const Vector& cand) {
    if (cand.size() != F.n) return;
    auto z = project_onto_set(F, cand, 60, 1e-9);
    if (!z) return;
    const double val = eval_quadratic(f, *z);
    if (!res.upper.is_finite() || val < res.upper.value()) {
      res.upper = ExtendedValue::finite(val);
      res.minimizer = *z;
    }
  };
  if (cfg.warm_start) try_incumbent(*cfg.warm_start);

  // Root box tightening: probe each coordinate against the root relaxation.
  for (int pass = 0; pass < cfg.obbt_passes; ++pass) {
    NodeLp node = build_node_lp(mdl, lo, hi);
    bool changed = false;
    for (Index l = 0; l < F.n; ++l) {
      for (const int dirn : {+1, -1}) {
        LinearProgram probe = node.lp;
        probe.c = Vector::Zero(probe.n);
        probe.c[l] = dirn;
        const LpResult pr = solve_lp(probe, kNodeLpTols);
        if (pr.kind == LpStatusKind::Infeasible) {
          res.kind = GlobalStatusKind::Infeasible;
          res.lower_bound = unbounded();
          return res;
        }
        if (pr.kind != LpStatusKind::Optimal) continue;
        if (dirn > 0 && pr.value < hi[l] - 1e-9) {
          hi[l] = std::max(pr.value, lo[l]);
          changed = true;
        } else if (dirn < 0 && -pr.value > lo[l] + 1e-9) {
          lo[l] = std::min(-pr.value, hi[l]);
          changed = true;
        }
      }
    }
    if (!changed) break;
  }

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  long next_id = 0;
  open.push(Node{lo, hi, -unbounded(), next_id++});

  double global_lb = -unbounded();

  auto terminal = [&](GlobalStatusKind kind) {
    res.kind = kind;
    res.lower_bound = global_lb;
    return res;
  };

  while (!open.empty()) {
    if (res.nodes >= cfg.node_budget) {
      global_lb = open.top().bound;
      return terminal(GlobalStatusKind::BudgetExhausted);
    }
    Node nd = open.top();
    open.pop();
    // Bounds are inherited, so the top of the heap is a valid global bound.
    global_lb = nd.bound;
    if (res.upper.is_finite() && !is_unbounded(-global_lb) &&
        global_lb >= res.upper.value() - cfg.gap_tol)
      return terminal(GlobalStatusKind::Solved);
    if (cfg.stop_when_lb_ge && !is_unbounded(-global_lb) && global_lb >= *cfg.stop_when_lb_ge)
      return terminal(GlobalStatusKind::EarlyCertified);

    ++res.nodes;
    NodeLp node = build_node_lp(mdl, nd.lo, nd.hi);
    LpResult lr = solve_lp(node.lp, kNodeLpTols);
    if (lr.kind == LpStatusKind::Infeasible) continue;
    double node_lb = nd.bound;
    Vector zhat = 0.5 * (nd.lo + nd.hi);  // fallback when the node LP fails
    if (lr.kind == LpStatusKind::Optimal) {
      node_lb = std::max(node_lb, -lr.value + mdl.f->c);
      for (int round = 0; round < cfg.refine_rounds && mdl.has_convex; ++round) {
        add_tangent(mdl, lr.v.head(F.n));
        NodeLp node2 = build_node_lp(mdl, nd.lo, nd.hi);
        LpResult lr2 = solve_lp(node2.lp, kNodeLpTols);
        if (lr2.kind != LpStatusKind::Optimal) break;
        const double lb2 = -lr2.value + mdl.f->c;
        // Keep refining while the gain is meaningful against the target gap;
        // a fixed coarse floor here would stall convergence short of gap_tol.
        const bool progress = lb2 > node_lb + 0.01 * cfg.gap_tol * (1.0 + std::abs(node_lb));
        node_lb = std::max(node_lb, lb2);
        lr = std::move(lr2);
        if (!progress) break;
      }
      zhat = lr.v.head(F.n);
      try_incumbent(zhat);
    }
    if (cfg.stop_at_first_feasible && res.upper.is_finite())
      return terminal(GlobalStatusKind::EarlyCertified);
    if (cfg.stop_when_ub_le && res.upper.is_finite() && res.upper.value() <= *cfg.stop_when_ub_le)
      return terminal(GlobalStatusKind::EarlyCertified);

    if (res.upper.is_finite() && !is_unbounded(-node_lb) &&
        node_lb >= res.upper.value() - cfg.gap_tol)
      continue;

    // Branch on the axis with the largest weighted square mismatch.
    Index best_axis = -1;
    if (lr.kind == LpStatusKind::Optimal) {
      const Vector svals = lr.v.segment(node.s_base, static_cast<Index>(mdl.dirs.size()));
      std::vector<double> weight(mdl.dirs.size(), 1.0);  // ball row contributes 1 per axis dir
      for (const auto& terms : mdl.eq_terms)
        for (const auto& t : terms) weight[static_cast<std::size_t>(t.dir)] += std::abs(t.coeff);
      for (const auto& t : mdl.concave_terms)
        weight[static_cast<std::size_t>(t.dir)] += std::abs(t.coeff);
      double best_score = 1e-12;
      for (std::size_t k = 0; k < mdl.dirs.size(); ++k) {
        const double t = mdl.dirs[k].d.dot(zhat);
        const double mis = std::abs(svals[static_cast<Index>(k)] - t * t) * weight[k];
        if (mis <= best_score) continue;
        // Attribute the direction's mismatch to its widest participating axis.
        Index axis = -1;
        double ax_score = 0.0;
        for (Index l = 0; l < F.n; ++l) {
          const double s = std::abs(mdl.dirs[k].d[l]) * (nd.hi[l] - nd.lo[l]);
          if (s > ax_score + 1e-15) {
            ax_score = s;
            axis = l;
          }
        }
        if (axis >= 0 && nd.hi[axis] - nd.lo[axis] > 1e-9) {
          best_score = mis;
          best_axis = axis;
        }
      }
    }
    if (best_axis < 0) {
      // Relaxation is square-consistent; fall back to the widest box edge.
      double wmax = 1e-9;
      for (Index l = 0; l < F.n; ++l)
        if (nd.hi[l] - nd.lo[l] > wmax) {
          wmax = nd.hi[l] - nd.lo[l];
          best_axis = l;
        }
      if (best_axis < 0) continue;  // box is a point: fully resolved
    }
    const double w = nd.hi[best_axis] - nd.lo[best_axis];
    double split = std::clamp(zhat[best_axis], nd.lo[best_axis] + 0.25 * w,
                              nd.hi[best_axis] - 0.25 * w);
    Node left{nd.lo, nd.hi, node_lb, next_id++};
    left.hi[best_axis] = split;
    Node right{nd.lo, nd.hi, node_lb, next_id++};
    right.lo[best_axis] = split;
    open.push(std::move(left));
    open.push(std::move(right));
  }

  if (!res.upper.is_finite()) {
    res.kind = GlobalStatusKind::Infeasible;
    res.lower_bound = unbounded();
    return res;
  }
  // Every node was pruned at incumbent - gap_tol or proved infeasible.
  global_lb = res.upper.value() - cfg.gap_tol;
  return terminal(GlobalStatusKind::Solved);
}

GridMinResult brute_force_min(const QuadraticForm& f, const BlockFeasibleSet& F, int resolution) {
  if (F.n > 4) throw std::invalid_argument("brute_force_min: only supported for n <= 4");
  if (resolution < 2) throw std::invalid_argument("brute_force_min: resolution must be >= 2");
  if (f.dim() != F.n) throw std::invalid_argument("brute_force_min: dimension mismatch");
  validate_set(F);

  Vector lo, hi;
  coordinate_box(F, lo, hi);
  const Index n = F.n;
  double h = 0.0;
  for (Index l = 0; l < n; ++l) h = std::max(h, (hi[l] - lo[l]) / (resolution - 1));
  const double half_diag = 0.5 * h * std::sqrt(static_cast<double>(n));
  double zmax = 0.0;
  for (Index l = 0; l < n; ++l) zmax += std::max(lo[l] * lo[l], hi[l] * hi[l]);
  zmax = std::sqrt(zmax);

  // Per-constraint slack so the grid cannot miss the feasible surface.
  std::vector<double> eq_tol(F.quad_eqs.size());
  for (std::size_t j = 0; j < F.quad_eqs.size(); ++j) {
    const double L = 2.0 * F.quad_eqs[j].D.operatorNorm() * zmax;
    eq_tol[j] = 1e-6 + L * half_diag;
  }
  const double ball_tol = 1e-6 + 2.0 * zmax * half_diag;
  const double Lf = 2.0 * (f.Q.operatorNorm() * zmax + f.q.norm());

  GridMinResult out;
  out.value = ExtendedValue::infinity();
  // Two-sided: scored points sit on F (projection tol), so the value cannot
  // dip below the true minimum; coverage costs at most a cell plus the
  // admitted projection travel.
  out.error_bound = 3.0 * Lf * half_diag + 1e-6;

  Vector z(n);
  const long total = static_cast<long>(std::pow(resolution, static_cast<double>(n)) + 0.5);
  for (long t = 0; t < total; ++t) {
    long rem = t;
    for (Index l = 0; l < n; ++l) {
      const int il = static_cast<int>(rem % resolution);
      rem /= resolution;
      z[l] = lo[l] + (hi[l] - lo[l]) * il / (resolution - 1);
    }
    if (F.nonneg && z.minCoeff() < -1e-12) continue;
    bool ok = z.squaredNorm() <= F.ball_radius + ball_tol;
    for (std::size_t j = 0; ok && j < F.quad_eqs.size(); ++j)
      ok = std::abs(z.dot(F.quad_eqs[j].D * z) - F.quad_eqs[j].rhs) <= eq_tol[j];
    if (!ok) continue;
    // Score a genuinely feasible point: pull the candidate onto F and reject
    // projections that travelled further than a cell (any true minimizer has
    // a lattice neighbour within half_diag, so nothing near it is lost).
    const auto zf = project_onto_set(F, z, 60, 1e-8);
    if (!zf || (*zf - z).norm() > 2.0 * half_diag + 1e-9) continue;
    ++out.feasible_points;
    const double val = eval_quadratic(f, *zf);
    if (!out.value.is_finite() || val < out.value.value()) {
      out.value = ExtendedValue::finite(val);
      out.argmin = *zf;
    }
  }
  return out;
}

}  // namespace copo
