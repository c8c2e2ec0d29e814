#include "copo/quadratic_form.hpp"

namespace copo {

QuadraticForm::QuadraticForm(Matrix Q_in, Vector q_in, double c_in)
    : Q(std::move(Q_in)), q(std::move(q_in)), c(c_in) {
  if (Q.rows() != Q.cols()) throw std::invalid_argument("QuadraticForm: Q not square");
  if (Q.rows() != q.size()) throw std::invalid_argument("QuadraticForm: Q/q dimension mismatch");
  Q = ((Q + Q.transpose()) / 2.0).eval();
}

double eval_quadratic(const QuadraticForm& f, const Vector& x) {
  if (x.size() != f.dim()) throw std::invalid_argument("eval_quadratic: dimension mismatch");
  return x.dot(f.Q * x) + 2.0 * f.q.dot(x) + f.c;
}

Vector gradient(const QuadraticForm& f, const Vector& x) {
  return 2.0 * (f.Q * x + f.q);
}

}  // namespace copo
