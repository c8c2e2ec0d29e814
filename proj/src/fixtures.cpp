#include "copo/fixtures.hpp"

#include <algorithm>
#include <stdexcept>

namespace copo {

namespace {

// Simplex {z >= 0 : e'z = s} as a block set: on the orthant the equality
// (e'z)^2 = s^2 is equivalent and fits the quadratic-equality format. The
// ball ||z||^2 <= s^2 is implied, so the stated radius never binds.
BlockFeasibleSet simplex_set(Index n, double s) {
  BlockFeasibleSet F;
  F.n = n;
  F.nonneg = true;
  F.ball_radius = s * s;
  F.quad_eqs.push_back({Matrix::Ones(n, n), s * s});
  return F;
}

}  // namespace

EnvelopeFixture make_env_simplex(double b) {
  EnvelopeFixture fx;
  fx.b = b;
  fx.A = Matrix::Zero(2, 2);
  fx.A(1, 1) = b;
  fx.F = simplex_set(2, 1.0);
  fx.witness = fx.embed(0.5);
  return fx;
}

LiftedProgram make_quad_1d(double B, double C) {
  Matrix Qhat = Matrix::Zero(3, 3);
  Qhat(1, 2) = Qhat(2, 1) = B;
  Qhat(2, 2) = C;

  std::vector<LiftedConstraint> cons;
  Matrix H1 = Matrix::Zero(3, 3);
  H1(0, 1) = H1(1, 0) = H1(0, 2) = H1(2, 0) = 0.5;  // x + y = 1
  cons.push_back({H1, 1.0});
  Matrix H2 = Matrix::Zero(3, 3);
  H2.bottomRightCorner(2, 2).setOnes();  // (x + y)^2 = 1
  cons.push_back({H2, 1.0});

  return make_lifted_program(Qhat, std::move(cons), simplex_set(2, 1.0), 1);
}

double quad_1d_phi(double B, double C, double x) {
  if (x < 0.0 || x > 1.0)
    throw std::invalid_argument("quad_1d_phi: x outside the effective domain [0, 1]");
  return (C - 2.0 * B) * x * x + 2.0 * (B - C) * x + C;
}

Matrix quad_2d_C() {
  Matrix C(2, 2);
  C << 1.5566, 0.5781, 0.5781, 0.2557;
  return C;
}

LiftedProgram make_quad_2d() {
  const Matrix C = quad_2d_C();
  const Matrix B = -Matrix::Identity(2, 2);

  Matrix Qhat = Matrix::Zero(5, 5);
  Qhat.block(1, 3, 2, 2) = B;
  Qhat.block(3, 1, 2, 2) = B.transpose();
  Qhat.block(3, 3, 2, 2) = C;

  std::vector<LiftedConstraint> cons;
  Matrix H1 = Matrix::Zero(5, 5);
  H1.block(0, 1, 1, 4).setConstant(0.5);  // e'x + e'y = 1
  H1.block(1, 0, 4, 1).setConstant(0.5);
  cons.push_back({H1, 1.0});
  Matrix H2 = Matrix::Zero(5, 5);
  H2.bottomRightCorner(4, 4).setOnes();  // (e'x + e'y)^2 = 1
  cons.push_back({H2, 1.0});

  return make_lifted_program(Qhat, std::move(cons), simplex_set(4, 1.0), 2);
}

bool quad_2d_in_dom(const Vector& x, double tol) {
  if (x.size() != 2) return false;
  return x.minCoeff() >= -tol && x.sum() <= 1.0 + tol;
}

ExtendedValue quad_2d_phi(const Vector& x) {
  if (!quad_2d_in_dom(x)) return ExtendedValue::infinity();
  const Matrix C = quad_2d_C();
  const double t = std::max(0.0, 1.0 - x.sum());
  // Minimize g(s) = 2x'B(s, t-s) + (s, t-s)'C(s, t-s) over s in [0, t] with
  // B = -I; the quadratic coefficient is e'Ce > 0, so the interior
  // stationary point is the global minimum of the parabola.
  const double a2 = C(0, 0) - 2.0 * C(0, 1) + C(1, 1);
  const double a1 = -2.0 * x(0) + 2.0 * x(1) + 2.0 * C(0, 1) * t - 2.0 * C(1, 1) * t;
  const double a0 = -2.0 * x(1) * t + C(1, 1) * t * t;
  auto g = [&](double s) { return a2 * s * s + a1 * s + a0; };
  double best = std::min(g(0.0), g(t));
  if (a2 > 0.0) {
    const double s_star = -a1 / (2.0 * a2);
    if (s_star > 0.0 && s_star < t) best = std::min(best, g(s_star));
  }
  return ExtendedValue::finite(best);
}

}  // namespace copo
