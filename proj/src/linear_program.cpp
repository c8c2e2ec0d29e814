#include "copo/linear_program.hpp"

#include <algorithm>
#include <cmath>

namespace copo {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kDegenerateStep = 1e-10;
constexpr int kBlandTrigger = 120;

enum Pos : std::int8_t { AtLower = 0, AtUpper = 1, FreeAtZero = 2, Basic = 3 };

// Working data of the bounded-variable simplex over columns
// [structural | slacks | artificials]. T = B^{-1} * A_full is maintained by
// explicit pivoting; basic values live in xb, nonbasic values are implied by
// position flags.
struct Work {
  Index m = 0, ncol = 0, nstruct = 0;
  Matrix T;
  Vector xb;            // basic variable values, one per row
  std::vector<int> basis;
  std::vector<Pos> pos;  // position of every column
  Vector lob, hib;
  Vector rc;             // reduced costs for the active objective
  std::vector<char> locked;
  long iterations = 0;
  int degenerate_streak = 0;
  bool bland = false;

  double nb_value(Index j) const {
    switch (pos[static_cast<std::size_t>(j)]) {
      case AtLower: return lob[j];
      case AtUpper: return hib[j];
      default: return 0.0;
    }
  }
};

void compute_reduced_costs(Work& w, const Vector& cost) {
  w.rc = cost;
  for (Index i = 0; i < w.m; ++i) {
    const int bj = w.basis[static_cast<std::size_t>(i)];
    const double cb = cost[bj];
    if (cb != 0.0) w.rc -= cb * w.T.row(i).transpose();
  }
  for (Index i = 0; i < w.m; ++i) w.rc[w.basis[static_cast<std::size_t>(i)]] = 0.0;
}

struct PriceResult {
  Index col = -1;
  int dir = 0;  // +1 increase, -1 decrease
};

PriceResult price(const Work& w, double opt_tol) {
  PriceResult best;
  double best_score = opt_tol;
  for (Index j = 0; j < w.ncol; ++j) {
    const auto sj = static_cast<std::size_t>(j);
    if (w.pos[sj] == Basic || w.locked[sj]) continue;
    const double d = w.rc[j];
    int dir = 0;
    if (d > opt_tol && (w.pos[sj] == AtLower || w.pos[sj] == FreeAtZero)) dir = +1;
    else if (d < -opt_tol && (w.pos[sj] == AtUpper || w.pos[sj] == FreeAtZero)) dir = -1;
    if (dir == 0) continue;
    if (w.bland) return {j, dir};
    const double score = std::abs(d);
    if (score > best_score) {
      best_score = score;
      best = {j, dir};
    }
  }
  return best;
}

struct Ratio {
  double step = 0.0;
  Index row = -1;        // leaving row, -1 for bound flip
  bool to_upper = false; // leaving variable parks at its upper bound
  bool unbounded = false;
};

Ratio ratio_test(const Work& w, Index j, int dir, double feas_tol) {
  Ratio r;
  r.step = unbounded();
  // Entering variable's own span.
  if (!is_unbounded(w.lob[j]) && !is_unbounded(w.hib[j])) r.step = w.hib[j] - w.lob[j];
  const Vector col = w.T.col(j);
  for (Index i = 0; i < w.m; ++i) {
    const double a = col[i] * dir;  // xb_i decreases by a * step
    if (std::abs(a) <= kPivotTol) continue;
    const int bj = w.basis[static_cast<std::size_t>(i)];
    double limit;
    bool park_upper;
    if (a > 0.0) {  // basic value falls toward its lower bound
      if (is_unbounded(w.lob[bj])) continue;
      limit = (w.xb[i] - w.lob[bj] + feas_tol) / a;
      park_upper = false;
    } else {  // basic value rises toward its upper bound
      if (is_unbounded(w.hib[bj])) continue;
      limit = (w.hib[bj] - w.xb[i] + feas_tol) / (-a);
      park_upper = true;
    }
    limit = std::max(limit, 0.0);
    const bool better =
        limit < r.step - 1e-12 ||
        (limit < r.step + 1e-12 && r.row >= 0 &&
         w.basis[static_cast<std::size_t>(i)] < w.basis[static_cast<std::size_t>(r.row)]);
    if (better) {
      r.step = limit;
      r.row = i;
      r.to_upper = park_upper;
    }
  }
  if (is_unbounded(r.step)) r.unbounded = true;
  return r;
}

void apply_step(Work& w, Index j, int dir, const Ratio& r) {
  const Vector col = w.T.col(j);
  const double step = r.step;
  if (step != 0.0) w.xb -= (dir * step) * col;
  if (r.row < 0) {  // bound flip
    w.pos[static_cast<std::size_t>(j)] = dir > 0 ? AtUpper : AtLower;
    return;
  }
  const Index rr = r.row;
  const int leaving = w.basis[static_cast<std::size_t>(rr)];
  const double entering_value = w.nb_value(j) + dir * step;
  // Pivot T on (rr, j).
  const double piv = w.T(rr, j);
  w.T.row(rr) /= piv;
  for (Index i = 0; i < w.m; ++i) {
    if (i == rr) continue;
    const double f = w.T(i, j);
    if (f != 0.0) w.T.row(i) -= f * w.T.row(rr);
  }
  const double rcj = w.rc[j];
  if (rcj != 0.0) w.rc -= rcj * w.T.row(rr).transpose();
  w.rc[j] = 0.0;
  w.basis[static_cast<std::size_t>(rr)] = static_cast<int>(j);
  w.pos[static_cast<std::size_t>(j)] = Basic;
  w.pos[static_cast<std::size_t>(leaving)] = r.to_upper ? AtUpper : AtLower;
  if (is_unbounded(r.to_upper ? w.hib[leaving] : w.lob[leaving]))
    w.pos[static_cast<std::size_t>(leaving)] = FreeAtZero;  // free var leaves at value ~0
  w.xb[rr] = entering_value;
}

enum class LoopExit { Optimal, Unbounded, IterLimit };

struct LoopResult {
  LoopExit exit = LoopExit::Optimal;
  Index unbounded_col = -1;
  int unbounded_dir = 0;
};

LoopResult run_simplex(Work& w, const Tolerances& tols, long iter_cap) {
  while (true) {
    if (w.iterations >= iter_cap) return {LoopExit::IterLimit, -1, 0};
    const PriceResult p = price(w, tols.optimality);
    if (p.col < 0) return {LoopExit::Optimal, -1, 0};
    const Ratio r = ratio_test(w, p.col, p.dir, 0.0);
    if (r.unbounded) return {LoopExit::Unbounded, p.col, p.dir};
    ++w.iterations;
    if (r.step <= kDegenerateStep) {
      if (++w.degenerate_streak >= kBlandTrigger) w.bland = true;
    } else {
      w.degenerate_streak = 0;
    }
    apply_step(w, p.col, p.dir, r);
  }
}

}  // namespace

LpResult solve_lp(const LinearProgram& lp, const Tolerances& tols) {
  if (lp.c.size() != lp.n || lp.lo.size() != lp.n || lp.hi.size() != lp.n)
    throw std::invalid_argument("solve_lp: inconsistent problem dimensions");
  const Index m = lp.m();
  const Index nstruct = lp.n;

  Work w;
  w.m = m;
  w.nstruct = nstruct;
  w.ncol = nstruct + m;  // artificials appended below as needed
  std::vector<double> lob(static_cast<std::size_t>(nstruct + m));
  std::vector<double> hib(lob.size());
  for (Index j = 0; j < nstruct; ++j) {
    lob[static_cast<std::size_t>(j)] = lp.lo[j];
    hib[static_cast<std::size_t>(j)] = lp.hi[j];
    if (lp.lo[j] > lp.hi[j]) throw std::invalid_argument("solve_lp: crossed bounds");
  }
  for (Index i = 0; i < m; ++i) {
    const auto s = lp.sense[static_cast<std::size_t>(i)];
    const auto sj = static_cast<std::size_t>(nstruct + i);
    lob[sj] = (s == RowSense::GE) ? -unbounded() : 0.0;
    hib[sj] = (s == RowSense::LE) ? unbounded() : 0.0;
  }

  // Nonbasic start for structural columns: nearest finite bound, else free 0.
  std::vector<Pos> pos(static_cast<std::size_t>(nstruct + m), FreeAtZero);
  for (Index j = 0; j < nstruct; ++j) {
    const auto sj = static_cast<std::size_t>(j);
    if (!is_unbounded(lob[sj]) &&
        (is_unbounded(hib[sj]) || std::abs(lob[sj]) <= std::abs(hib[sj])))
      pos[sj] = AtLower;
    else if (!is_unbounded(hib[sj]))
      pos[sj] = AtUpper;
  }

  // Row activities at the nonbasic start decide slack-vs-artificial basis.
  Vector beta(m);
  for (Index i = 0; i < m; ++i) {
    double act = 0.0;
    for (Index j = 0; j < nstruct; ++j) {
      const auto sj = static_cast<std::size_t>(j);
      const double xv = pos[sj] == AtLower ? lob[sj] : (pos[sj] == AtUpper ? hib[sj] : 0.0);
      act += lp.rows[static_cast<std::size_t>(i)][j] * xv;
    }
    beta[i] = lp.rhs[static_cast<std::size_t>(i)] - act;
  }

  std::vector<Index> artificial_rows;
  for (Index i = 0; i < m; ++i) {
    const auto sj = static_cast<std::size_t>(nstruct + i);
    const bool slack_ok = beta[i] >= lob[sj] - tols.feasibility &&
                          beta[i] <= hib[sj] + tols.feasibility;
    if (!slack_ok) artificial_rows.push_back(i);
  }
  const Index nart = static_cast<Index>(artificial_rows.size());
  w.ncol = nstruct + m + nart;

  w.T = Matrix::Zero(m, w.ncol);
  for (Index i = 0; i < m; ++i)
    w.T.block(i, 0, 1, nstruct) = lp.rows[static_cast<std::size_t>(i)].transpose();
  for (Index i = 0; i < m; ++i) w.T(i, nstruct + i) = 1.0;

  w.lob = Vector(static_cast<Index>(lob.size()) + nart);
  w.hib = Vector(static_cast<Index>(hib.size()) + nart);
  for (std::size_t j = 0; j < lob.size(); ++j) {
    w.lob[static_cast<Index>(j)] = lob[j];
    w.hib[static_cast<Index>(j)] = hib[j];
  }
  pos.resize(static_cast<std::size_t>(w.ncol), AtLower);
  w.locked.assign(static_cast<std::size_t>(w.ncol), 0);

  w.basis.assign(static_cast<std::size_t>(m), -1);
  w.xb = Vector::Zero(m);
  Vector phase1_cost = Vector::Zero(w.ncol);
  for (Index k = 0; k < nart; ++k) {
    const Index i = artificial_rows[static_cast<std::size_t>(k)];
    const Index col = nstruct + m + k;
    const auto scol = static_cast<std::size_t>(col);
    const auto sslack = static_cast<std::size_t>(nstruct + i);
    // Clamp slack to its nearest bound, then the artificial absorbs the rest.
    double sv = std::clamp(beta[i], w.lob[nstruct + i], w.hib[nstruct + i]);
    if (!std::isfinite(sv)) sv = 0.0;
    pos[sslack] = (sv == w.hib[nstruct + i] && w.hib[nstruct + i] != 0.0) ? AtUpper : AtLower;
    if (is_unbounded(w.lob[nstruct + i]) && sv == 0.0) pos[sslack] = AtUpper;  // GE slack parks at 0
    const double resid = beta[i] - sv;
    const double sigma = resid >= 0.0 ? 1.0 : -1.0;
    w.T(i, col) = sigma;
    w.lob[col] = 0.0;
    w.hib[col] = unbounded();
    w.basis[static_cast<std::size_t>(i)] = static_cast<int>(col);
    pos[scol] = Basic;
    w.xb[i] = std::abs(resid);
    phase1_cost[col] = -1.0;  // maximize -(sum of artificials)
  }
  for (Index i = 0; i < m; ++i) {
    if (w.basis[static_cast<std::size_t>(i)] >= 0) continue;
    const Index col = nstruct + i;
    w.basis[static_cast<std::size_t>(i)] = static_cast<int>(col);
    pos[static_cast<std::size_t>(col)] = Basic;
    w.xb[i] = beta[i];
  }
  w.pos = std::move(pos);

  const long iter_cap = 2000 + 60L * static_cast<long>(m + w.ncol);
  LpResult res;

  if (nart > 0) {
    compute_reduced_costs(w, phase1_cost);
    const LoopResult lr = run_simplex(w, tols, iter_cap);
    if (lr.exit != LoopExit::Optimal) {
      // Phase 1 is bounded above by 0, so a ray here is numerical failure.
      res.kind = LpStatusKind::IterationLimit;
      res.iterations = w.iterations;
      return res;
    }
    double infeas = 0.0;
    for (Index i = 0; i < m; ++i)
      if (w.basis[static_cast<std::size_t>(i)] >= nstruct + m) infeas += std::abs(w.xb[i]);
    if (infeas > 1e3 * tols.feasibility) {
      res.kind = LpStatusKind::Infeasible;
      res.farkas = Vector(m);
      for (Index i = 0; i < m; ++i) res.farkas[i] = -w.rc[nstruct + i];
      res.iterations = w.iterations;
      return res;
    }
    for (Index k = 0; k < nart; ++k) {
      const auto scol = static_cast<std::size_t>(nstruct + m + k);
      w.locked[scol] = 1;
      w.lob[nstruct + m + k] = 0.0;
      w.hib[nstruct + m + k] = 0.0;
    }
  }

  Vector cost = Vector::Zero(w.ncol);
  cost.head(nstruct) = lp.c;
  compute_reduced_costs(w, cost);
  const LoopResult lr = run_simplex(w, tols, iter_cap);
  res.iterations = w.iterations;

  auto structural_values = [&]() {
    Vector v(nstruct);
    for (Index j = 0; j < nstruct; ++j) {
      const auto sj = static_cast<std::size_t>(j);
      v[j] = w.pos[sj] == Basic ? 0.0 : w.nb_value(j);
    }
    for (Index i = 0; i < m; ++i) {
      const int bj = w.basis[static_cast<std::size_t>(i)];
      if (bj < nstruct) v[bj] = w.xb[i];
    }
    return v;
  };

  if (lr.exit == LoopExit::IterLimit) {
    res.kind = LpStatusKind::IterationLimit;
    return res;
  }
  if (lr.exit == LoopExit::Unbounded) {
    res.kind = LpStatusKind::Unbounded;
    Vector ray = Vector::Zero(nstruct);
    if (lr.unbounded_col < nstruct) ray[lr.unbounded_col] = lr.unbounded_dir;
    const Vector col = w.T.col(lr.unbounded_col);
    for (Index i = 0; i < m; ++i) {
      const int bj = w.basis[static_cast<std::size_t>(i)];
      if (bj < nstruct) ray[bj] = -col[i] * lr.unbounded_dir;
    }
    res.ray = ray;
    res.v = structural_values();
    return res;
  }

  res.kind = LpStatusKind::Optimal;
  res.v = structural_values();
  res.value = lp.c.dot(res.v);
  res.duals = Vector(m);
  for (Index i = 0; i < m; ++i) res.duals[i] = -w.rc[nstruct + i];
  return res;
}

}  // namespace copo
