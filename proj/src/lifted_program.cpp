#include "copo/lifted_program.hpp"

namespace copo {

namespace {
Matrix symmetrized(const Matrix& M) { return (M + M.transpose()) / 2.0; }
}  // namespace

LiftedProgram make_lifted_program(Matrix Qhat, std::vector<LiftedConstraint> constraints,
                                  BlockFeasibleSet ground, Index n_x) {
  LiftedProgram lp;
  lp.dim = ground.n + 1;
  if (Qhat.rows() != lp.dim || Qhat.cols() != lp.dim)
    throw std::invalid_argument("make_lifted_program: Qhat dimension mismatch");
  if (n_x < 0 || n_x > ground.n)
    throw std::invalid_argument("make_lifted_program: n_x out of range");
  validate_set(ground);
  lp.Qhat = symmetrized(Qhat);
  lp.ground = std::move(ground);
  lp.n_x = n_x;

  Matrix e11 = Matrix::Zero(lp.dim, lp.dim);
  e11(0, 0) = 1.0;
  bool has_homogenization = false;
  for (auto& c : constraints) {
    if (c.H.rows() != lp.dim || c.H.cols() != lp.dim)
      throw std::invalid_argument("make_lifted_program: constraint dimension mismatch");
    c.H = symmetrized(c.H);
    if ((c.H - e11).lpNorm<Eigen::Infinity>() <= 1e-12 && std::abs(c.b - 1.0) <= 1e-12)
      has_homogenization = true;
  }
  if (!has_homogenization) {
    LiftedConstraint h;
    h.H = e11;
    h.b = 1.0;
    lp.constraints.push_back(std::move(h));
  }
  for (auto& c : constraints) lp.constraints.push_back(std::move(c));
  return lp;
}

double constraint_value(const LiftedConstraint& c, const Vector& u) {
  const QuadraticForm f = lifted_matrix_form(c.H);
  return eval_quadratic(f, u);
}

double objective_value(const LiftedProgram& lp, const Vector& u) {
  const QuadraticForm f = lifted_matrix_form(lp.Qhat);
  return eval_quadratic(f, u);
}

QuadraticForm lifted_matrix_form(const Matrix& M) {
  if (M.rows() != M.cols() || M.rows() < 1)
    throw std::invalid_argument("lifted_matrix_form: bad matrix");
  const Index n = M.rows() - 1;
  Matrix Q = symmetrized(M).block(1, 1, n, n);
  Vector q = symmetrized(M).block(1, 0, n, 1);
  return QuadraticForm(std::move(Q), std::move(q), M(0, 0));
}

}  // namespace copo
