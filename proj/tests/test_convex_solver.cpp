#include "copo/ball_qp.hpp"
#include "copo/linear_program.hpp"
#include "copo/rng.hpp"
#include "copo/types.hpp"

#include <doctest.h>

#include <cmath>

using namespace copo;

namespace {

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("lp maximizes over a box-constrained polytope") {
  LinearProgram lp(2);
  lp.c = vec2(1.0, 2.0);
  lp.add_row(vec2(1.0, 1.0), RowSense::LE, 1.0);
  lp.lo = Vector::Zero(2);
  const LpResult res = solve_lp(lp);
  REQUIRE(res.kind == LpStatusKind::Optimal);
  CHECK(res.value == doctest::Approx(2.0));
  CHECK(res.v(0) == doctest::Approx(0.0));
  CHECK(res.v(1) == doctest::Approx(1.0));
  REQUIRE(res.duals.size() == 1);
  CHECK(res.duals(0) == doctest::Approx(2.0));  // marginal value of the row
}

TEST_CASE("lp reports equality rows and mixed senses") {
  LinearProgram lp(3);
  lp.c = Vector::Zero(3);
  lp.c(2) = 1.0;
  Vector row(3);
  row << 1.0, 1.0, 1.0;
  lp.add_row(row, RowSense::EQ, 1.0);
  row << 0.0, 1.0, 1.0;
  lp.add_row(row, RowSense::GE, 0.5);
  row << 0.0, 0.0, 1.0;
  lp.add_row(row, RowSense::LE, 0.75);
  lp.lo = Vector::Zero(3);
  const LpResult res = solve_lp(lp);
  REQUIRE(res.kind == LpStatusKind::Optimal);
  CHECK(res.value == doctest::Approx(0.75));
  CHECK(res.v.sum() == doctest::Approx(1.0));
}

TEST_CASE("lp detects unboundedness with a feasible improving ray") {
  LinearProgram lp(2);
  lp.c = vec2(1.0, 0.0);
  lp.add_row(vec2(-1.0, 1.0), RowSense::LE, 0.0);
  lp.lo = Vector::Zero(2);
  const LpResult res = solve_lp(lp);
  REQUIRE(res.kind == LpStatusKind::Unbounded);
  REQUIRE(res.ray.size() == 2);
  CHECK(res.ray.dot(lp.c) > 0.0);
  // Ray satisfies the homogeneous constraints.
  CHECK(lp.rows[0].dot(res.ray) <= 1e-9);
  CHECK(res.ray.minCoeff() >= -1e-9);
}

TEST_CASE("lp certifies infeasibility") {
  LinearProgram lp(1);
  lp.c = Vector::Ones(1);
  lp.add_row(Vector::Ones(1), RowSense::GE, 1.0);
  lp.add_row(Vector::Ones(1), RowSense::LE, 0.0);
  const LpResult res = solve_lp(lp);
  REQUIRE(res.kind == LpStatusKind::Infeasible);
  CHECK(res.farkas.size() == 2);
}

TEST_CASE("lp honors variable bounds without explicit rows") {
  LinearProgram lp(2);
  lp.c = vec2(1.0, -1.0);
  lp.lo = vec2(-2.0, 0.5);
  lp.hi = vec2(3.0, unbounded());
  const LpResult res = solve_lp(lp);
  REQUIRE(res.kind == LpStatusKind::Optimal);
  CHECK(res.v(0) == doctest::Approx(3.0));
  CHECK(res.v(1) == doctest::Approx(0.5));
  CHECK(res.value == doctest::Approx(2.5));
}

TEST_CASE("ball qp projects a point onto a halfspace-cut disk") {
  // minimize ||v - (2, 0)||^2 over ||v||^2 <= 1: solution (1, 0).
  BallQp qp(2);
  qp.Q = Matrix::Identity(2, 2);
  qp.q = vec2(-2.0, 0.0);
  qp.c = 4.0;
  qp.ball_vars = {0, 1};
  qp.ball_rho = 1.0;
  const QpResult res = solve_ball_qp(qp);
  REQUIRE(res.kind == QpStatusKind::Optimal);
  CHECK(res.v(0) == doctest::Approx(1.0));
  CHECK(std::abs(res.v(1)) <= 1e-7);
  CHECK(res.value == doctest::Approx(1.0));
  CHECK(res.ball_dual > 0.0);
  CHECK(res.kkt_residual <= 1e-6);
}

TEST_CASE("ball qp with equality rows lands on the constrained minimizer") {
  // minimize v'v subject to v0 + v1 = 1: solution (1/2, 1/2), value 1/2.
  BallQp qp(2);
  qp.Q = Matrix::Identity(2, 2);
  qp.add_row(vec2(1.0, 1.0), RowSense::EQ, 1.0);
  const QpResult res = solve_ball_qp(qp);
  REQUIRE(res.kind == QpStatusKind::Optimal);
  CHECK(res.v(0) == doctest::Approx(0.5));
  CHECK(res.v(1) == doctest::Approx(0.5));
  CHECK(res.value == doctest::Approx(0.5));
  REQUIRE(res.row_duals.size() == 1);
  CHECK(std::abs(res.row_duals(0)) > 1e-9);
}

TEST_CASE("ball qp flags decrease directions when no ball caps them") {
  // minimize 2 q'v with zero Q and a one-sided row: unbounded below.
  BallQp qp(2);
  qp.q = vec2(1.0, 0.0);
  qp.add_row(vec2(0.0, 1.0), RowSense::GE, 0.0);
  const QpResult res = solve_ball_qp(qp);
  REQUIRE(res.kind == QpStatusKind::Unbounded);
  REQUIRE(res.ray.size() == 2);
  CHECK(2.0 * qp.q.dot(res.ray) < 0.0);
  CHECK(qp.rows[0].dot(res.ray) >= -1e-9);
}

TEST_CASE("ball qp certifies infeasible row systems") {
  BallQp qp(1);
  qp.Q = Matrix::Identity(1, 1);
  qp.add_row(Vector::Ones(1), RowSense::GE, 2.0);
  qp.add_row(Vector::Ones(1), RowSense::LE, 1.0);
  const QpResult res = solve_ball_qp(qp);
  REQUIRE(res.kind == QpStatusKind::Infeasible);
  CHECK(res.farkas.size() == 2);
}

TEST_CASE("ball qp respects the ball over a coordinate subset") {
  // minimize -2 v1 + v0^2 with ||v1||^2 <= 4 over subset {1}: v1 = 2, v0 = 0.
  BallQp qp(2);
  qp.Q(0, 0) = 1.0;
  qp.q = vec2(0.0, -1.0);
  qp.ball_vars = {1};
  qp.ball_rho = 4.0;
  const QpResult res = solve_ball_qp(qp);
  REQUIRE(res.kind == QpStatusKind::Optimal);
  CHECK(std::abs(res.v(0)) <= 1e-7);
  CHECK(res.v(1) == doctest::Approx(2.0));
  CHECK(res.value == doctest::Approx(-4.0));
}

TEST_CASE("ball qp starts from a caller hint without changing the answer") {
  BallQp qp(2);
  qp.Q = Matrix::Identity(2, 2);
  qp.q = vec2(-2.0, 0.0);
  qp.ball_vars = {0, 1};
  qp.ball_rho = 1.0;
  qp.start = vec2(0.0, 0.5);
  const QpResult res = solve_ball_qp(qp);
  REQUIRE(res.kind == QpStatusKind::Optimal);
  CHECK(res.v(0) == doctest::Approx(1.0));
}

TEST_CASE("random psd qps satisfy kkt and dominate feasible probes") {
  Rng rng(314);
  for (int trial = 0; trial < 60; ++trial) {
    const Index n = 2 + static_cast<Index>(rng.raw() % 3);  // 2..4
    Matrix raw(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) raw(i, j) = rng.uniform(-1.0, 1.0);
    BallQp qp(n);
    qp.Q = raw * raw.transpose() + 0.05 * Matrix::Identity(n, n);
    for (Index i = 0; i < n; ++i) qp.q(i) = rng.uniform(-1.0, 1.0);
    const int m = 1 + static_cast<int>(rng.raw() % 3);
    for (int k = 0; k < m; ++k) {
      Vector a(n);
      for (Index i = 0; i < n; ++i) a(i) = rng.uniform(-1.0, 1.0);
      // rhs chosen so the origin stays feasible: a'0 = 0 <= rhs.
      qp.add_row(a, RowSense::LE, rng.uniform(0.1, 1.0));
    }
    qp.ball_vars.clear();
    for (Index i = 0; i < n; ++i) qp.ball_vars.push_back(i);
    qp.ball_rho = rng.uniform(1.0, 4.0);

    const QpResult res = solve_ball_qp(qp);
    REQUIRE(res.kind == QpStatusKind::Optimal);
    CHECK(res.kkt_residual <= 1e-6);
    CHECK(res.v.squaredNorm() <= qp.ball_rho + 1e-7);
    for (Index k = 0; k < qp.m(); ++k) CHECK(qp.rows[k].dot(res.v) <= qp.rhs[k] + 1e-7);

    // Optimality against random feasible probes (rejection-sampled).
    int probes = 0;
    for (int attempt = 0; attempt < 200 && probes < 10; ++attempt) {
      Vector z(n);
      for (Index i = 0; i < n; ++i) z(i) = rng.uniform(-1.0, 1.0);
      z *= std::sqrt(qp.ball_rho) / std::max(1.0, z.norm());
      bool ok = z.squaredNorm() <= qp.ball_rho;
      for (Index k = 0; k < qp.m() && ok; ++k) ok = qp.rows[k].dot(z) <= qp.rhs[k];
      if (!ok) continue;
      ++probes;
      const double fz = z.dot(qp.Q * z) + 2.0 * qp.q.dot(z) + qp.c;
      CHECK(res.value <= fz + 1e-7);
    }
    CHECK(probes > 0);  // origin-feasible construction guarantees probes exist
  }
}
