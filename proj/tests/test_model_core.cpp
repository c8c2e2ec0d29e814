#include "copo/cut_pool.hpp"
#include "copo/feasible_set.hpp"
#include "copo/instance.hpp"
#include "copo/lifted_program.hpp"
#include "copo/quadratic_form.hpp"
#include "copo/rng.hpp"
#include "copo/types.hpp"

#include <doctest.h>

#include <cmath>

using namespace copo;

namespace {

BlockFeasibleSet unit_simplex(Index n) {
  BlockFeasibleSet F;
  F.n = n;
  F.nonneg = true;
  F.ball_radius = 1.0;
  F.quad_eqs.push_back({Matrix::Ones(n, n), 1.0});
  return F;
}

}  // namespace

TEST_CASE("quadratic form symmetrizes and evaluates with the factor-2 convention") {
  Matrix Q(2, 2);
  Q << 1.0, 2.0, 0.0, 3.0;
  Vector q(2);
  q << -1.0, 0.5;
  QuadraticForm f(Q, q, 2.0);
  CHECK(f.Q(0, 1) == f.Q(1, 0));
  CHECK(f.Q(0, 1) == doctest::Approx(1.0));

  Vector x(2);
  x << 2.0, -1.0;
  // x'Qx = 4 - 2*2 + 3 = 3 on the symmetrized matrix, 2q'x = -5, c = 2.
  CHECK(eval_quadratic(f, x) == doctest::Approx(3.0 - 5.0 + 2.0));
  const Vector g = gradient(f, x);
  CHECK(g(0) == doctest::Approx(2.0 * (f.Q.row(0).dot(x) + q(0))));
  CHECK(g(1) == doctest::Approx(2.0 * (f.Q.row(1).dot(x) + q(1))));

  // Symmetrization is idempotent bit for bit.
  QuadraticForm f2(f.Q, f.q, f.c);
  CHECK((f2.Q - f.Q).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("extended values order with one shared infinity") {
  const ExtendedValue inf = ExtendedValue::infinity();
  const ExtendedValue two = ExtendedValue::finite(2.0);
  CHECK(two < inf);
  CHECK_FALSE(inf < two);
  CHECK_FALSE(inf < inf);
  CHECK(inf.value_or(-1.0) == -1.0);
  CHECK_THROWS(inf.value());
  CHECK_THROWS(ExtendedValue::finite(std::numeric_limits<double>::infinity()));
  CHECK(is_unbounded(unbounded()));
  CHECK_FALSE(is_unbounded(1e308));
}

TEST_CASE("membership and residuals on the unit simplex") {
  const BlockFeasibleSet F = unit_simplex(2);
  validate_set(F);
  Vector z(2);
  z << 0.25, 0.75;
  CHECK(check_membership(F, z));
  CHECK(membership_residual(F, z) <= 1e-12);

  z << 0.5, 0.6;  // equality violated by (1.1)^2 - 1
  CHECK_FALSE(check_membership(F, z));
  CHECK(membership_residual(F, z) == doctest::Approx(1.1 * 1.1 - 1.0));

  z << -0.2, 1.2;  // sign violated
  CHECK_FALSE(check_membership(F, z));
}

TEST_CASE("coordinate box tightens with diagonal equalities") {
  BlockFeasibleSet F;
  F.n = 2;
  F.nonneg = true;
  F.ball_radius = 4.0;
  Vector d(2);
  d << 4.0, 1.0;
  F.quad_eqs.push_back({Matrix(d.asDiagonal()), 1.0});
  Vector lo, hi;
  coordinate_box(F, lo, hi);
  CHECK(lo(0) == 0.0);
  CHECK(hi(0) == doctest::Approx(0.5));   // sqrt(1/4)
  CHECK(hi(1) == doctest::Approx(1.0));   // sqrt(1/1) < sqrt(r) = 2
}

TEST_CASE("projection returns members and sampling stays feasible") {
  const BlockFeasibleSet F = unit_simplex(3);
  Vector z0(3);
  z0 << 0.9, 0.4, 0.1;
  const auto p = project_onto_set(F, z0);
  REQUIRE(p.has_value());
  CHECK(check_membership(F, *p));

  const auto pts = sample_feasible(F, 25, 7);
  CHECK(pts.size() == 25);
  for (const Vector& u : pts) CHECK(check_membership(F, u));
  // Deterministic per seed.
  const auto pts2 = sample_feasible(F, 25, 7);
  REQUIRE(pts2.size() == pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i)
    CHECK((pts[i] - pts2[i]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("cut pool accepts lifted members and rejects everything else") {
  const BlockFeasibleSet F = unit_simplex(2);
  CutPool pool(2);
  Vector u(2);
  u << 0.5, 0.5;
  CHECK(pool.add(F, lift_point(u)) == AddCutOutcome::Added);
  CHECK(pool.add(F, lift_point(u)) == AddCutOutcome::Duplicate);
  CHECK(pool.size() == 1);

  Vector bad(3);
  bad << 1.0, 0.9, 0.9;  // not on the simplex
  CHECK(pool.add(F, bad) == AddCutOutcome::Invalid);
  bad << 0.0, 0.5, 0.5;  // recession direction: compact sets have none
  CHECK(pool.add(F, bad) == AddCutOutcome::Invalid);
  CHECK(pool.size() == 1);
}

TEST_CASE("lifted programs prepend the homogenization row and evaluate") {
  Matrix Qhat = Matrix::Zero(3, 3);
  Qhat(2, 2) = 1.0;
  Matrix H = Matrix::Zero(3, 3);
  H(0, 1) = H(1, 0) = 0.5;
  const LiftedProgram lp = make_lifted_program(Qhat, {{H, 0.25}}, unit_simplex(2), 1);
  REQUIRE(lp.constraints.size() == 2);
  CHECK(lp.constraints[0].H(0, 0) == 1.0);
  CHECK(lp.constraints[0].b == 1.0);
  CHECK(lp.n_y() == 1);

  Vector u(2);
  u << 0.25, 0.75;
  CHECK(objective_value(lp, u) == doctest::Approx(0.75 * 0.75));
  CHECK(constraint_value(lp.constraints[1], u) == doctest::Approx(0.25));
  CHECK(constraint_value(lp.constraints[0], u) == doctest::Approx(1.0));
}

TEST_CASE("block instances validate and embed into the monolithic model") {
  BlockQcqpInstance inst;
  inst.S = 2;
  inst.n = 2;
  inst.A = 0.5 * Matrix::Identity(4, 4);
  inst.a = Vector::Zero(4);
  inst.r = 4.0;
  for (int i = 0; i < 2; ++i) {
    Block b;
    b.A = Matrix::Identity(2, 2);
    if (i == 1) b.A(1, 1) = -1.0;
    b.F = unit_simplex(2);
    b.F.ball_radius = inst.r;
    b.witness = Vector::Constant(2, 0.5);
    inst.blocks.push_back(b);
  }
  validate_instance(inst);

  Vector x(4);
  x << 0.5, 0.5, 0.25, 0.75;
  const ExtendedValue direct = eval_instance_objective(inst, x);
  REQUIRE(direct.is_finite());
  const QuadraticForm mono = monolithic_objective(inst);
  CHECK(direct.value() == doctest::Approx(eval_quadratic(mono, x)));

  const BlockFeasibleSet joint = monolithic_set(inst);
  CHECK(joint.n == 4);
  CHECK(check_membership(joint, x));
  Vector outside(4);
  outside << 0.5, 0.5, 0.5, 0.2;
  CHECK_FALSE(check_membership(joint, outside));
  CHECK_FALSE(eval_instance_objective(inst, outside).is_finite());

  // Block value functions report the infinity tag off the set.
  CHECK(eval_phi_block(inst.blocks[0], Vector::Constant(2, 0.5)).is_finite());
  CHECK_FALSE(eval_phi_block(inst.blocks[0], Vector::Constant(2, 0.9)).is_finite());
}

TEST_CASE("rng streams are deterministic and canonical draws live in [0,1)") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    const double u = a.canonical();
    CHECK(u == b.canonical());
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  CHECK(Rng::algorithm_id() == std::string("mt19937_64/canonical53"));
  Rng c(43);
  bool differs = false;
  Rng a2(42);
  for (int i = 0; i < 16 && !differs; ++i) differs = a2.raw() != c.raw();
  CHECK(differs);
}
