#pragma once

#include "copo/linear_program.hpp"
#include "copo/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace copo {

// minimize v'Qv + 2 q'v + c (Q PSD) subject to linear rows
// a_i'v {<=,>=,=} rhs_i and one optional ball ||v_B||^2 <= rho over the
// coordinate subset B. Bounds are expressed as rows by callers; the ball is
// the only nonlinear constraint in the project and every caller with a norm
// constraint routes through here.
struct BallQp {
  Index n = 0;
  Matrix Q;
  Vector q;
  double c = 0.0;
  std::vector<Vector> rows;
  std::vector<double> rhs;
  std::vector<RowSense> sense;
  std::vector<Index> ball_vars;
  double ball_rho = -1.0;  // < 0: no ball
  std::optional<Vector> start;

  explicit BallQp(Index n_vars)
      : n(n_vars), Q(Matrix::Zero(n_vars, n_vars)), q(Vector::Zero(n_vars)) {}

  void add_row(Vector a, RowSense s, double b) {
    if (a.size() != n) throw std::invalid_argument("BallQp::add_row: dimension mismatch");
    rows.push_back(std::move(a));
    sense.push_back(s);
    rhs.push_back(b);
  }
  Index m() const { return static_cast<Index>(rows.size()); }
  bool has_ball() const { return ball_rho >= 0.0; }
};

enum class QpStatusKind { Optimal, Infeasible, Unbounded, IterationLimit };

struct QpResult {
  QpStatusKind kind = QpStatusKind::IterationLimit;
  Vector v;
  double value = 0.0;
  Vector row_duals;       // one per row, zero when inactive
  double ball_dual = 0.0; // multiplier of the ball constraint, >= 0
  double kkt_residual = 0.0;
  Vector ray;             // Unbounded: recession direction of decrease
  Vector farkas;          // Infeasible: certificate from the phase-1 solve
  long iterations = 0;
  std::string note;
};

// Primal active-set method. Working-set subproblems with an active ball are
// solved through the secular equation in the ball multiplier; everything
// else is a dense KKT solve. Ties break toward the lowest row index.
QpResult solve_ball_qp(const BallQp& qp, const Tolerances& tols = {});

}  // namespace copo
