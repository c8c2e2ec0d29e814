#include "copo/copositivity.hpp"
#include "copo/fixtures.hpp"
#include "copo/quadratic_dual.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>

using namespace copo;

namespace {

// Dual slack matrix Qhat - sum_k lambda_k H_k - B*(w, W) for the 1d family,
// written out by hand so the test does not reuse the engine's own assembly.
Matrix dual_matrix_1d(const LiftedProgram& lp, const Vector& lambda, double w, double W) {
  Matrix M = lp.Qhat;
  for (Index k = 0; k < static_cast<Index>(lp.constraints.size()); ++k)
    M -= lambda(k) * lp.constraints[k].H;
  M(0, 1) -= w / 2.0;
  M(1, 0) -= w / 2.0;
  M(1, 1) -= W;
  return M;
}

Vector vec1(double x) {
  Vector v(1);
  v << x;
  return v;
}

}  // namespace

TEST_CASE("affine dual of the 1d family evaluates the envelope") {
  const LiftedProgram lp = make_quad_1d(0.0, 1.0);
  // phi(x) = (1-x)^2 is convex, so the affine dual is tight at every x.
  for (double x : {0.25, 0.5, 0.75}) {
    const AffineDualOutcome out = evaluate_lifted_envelope(lp, vec1(x));
    REQUIRE(out.kind == DualStatusKind::Value);
    CHECK(std::abs(out.value - quad_1d_phi(0.0, 1.0, x)) <= 1e-4);
  }
}

TEST_CASE("quadratic dual of the convex 1d family is exact") {
  const LiftedProgram lp = make_quad_1d(0.0, 1.0);
  const QuadraticDualOutcome out = solve_quadratic_dual(lp, vec1(0.5));
  REQUIRE(out.kind == DualStatusKind::Value);
  CHECK(std::abs(out.value - 0.25) <= 1e-4);
  // The certificate's slack matrix passes the oracle it was built against.
  const Matrix M = dual_matrix_1d(lp, out.cert.lambda, out.cert.w(0), out.cert.W(0, 0));
  const CopositivityResult ver = check_set_copositivity(M, lp.ground, 1e-5);
  CHECK(ver.nonnegative);
  // And the induced quadratic never exceeds phi on the segment.
  for (int k = 0; k <= 100; ++k) {
    const double x = k / 100.0;
    CHECK(certificate_value(out.cert, vec1(x)) <= quad_1d_phi(0.0, 1.0, x) + 1e-5);
  }
}

TEST_CASE("pinned reference certificate of the indefinite 1d family") {
  // B = 0, C = 1 with the hand-solved tuple: lambda = (-1/4, 3/4, 1/8),
  // w = -1/2, W = -1/2, objective value b'lambda = 5/8. Its induced
  // quadratic q(x) = 5/8 - x/2 - x^2/2 touches phi at x = 1/2.
  const LiftedProgram lp = make_quad_1d(0.0, 1.0);
  REQUIRE(lp.constraints.size() == 3);
  Vector lambda(3);
  lambda << -0.25, 0.75, 0.125;
  const double w = -0.5;
  const double W = -0.5;

  const Matrix M = dual_matrix_1d(lp, lambda, w, W);
  const CopositivityResult ver = check_set_copositivity(M, lp.ground, 1e-6);
  CHECK(ver.nonnegative);

  QuadraticCertificate cert;
  cert.lambda = lambda;
  cert.w = vec1(w);
  cert.W = Matrix::Constant(1, 1, W);
  cert.nu = lp.b().dot(lambda);
  CHECK(cert.nu == doctest::Approx(0.625));

  double max_gap = -1.0;
  for (int k = 0; k <= 100; ++k) {
    const double x = k / 100.0;
    const double q = certificate_value(cert, vec1(x));
    const double phi = quad_1d_phi(0.0, 1.0, x);
    CHECK(q <= phi + 1e-9);
    max_gap = std::max(max_gap, q - phi);
  }
  CHECK(max_gap == doctest::Approx(0.0).epsilon(1e-6));  // tight at x = 1/2

  // Raising the constant of the same tuple by 1/4 breaks underestimation at
  // the touching point, so the constant above is the largest valid one.
  CHECK(0.875 - 0.5 * 0.5 - 0.5 * 0.25 > quad_1d_phi(0.0, 1.0, 0.5) + 1e-3);
}

TEST_CASE("indefinite family with B = C = -1 only admits honest certificates") {
  const LiftedProgram lp = make_quad_1d(-1.0, -1.0);
  // phi(x) = x^2 - 1 here. The quadratic -2 + 3x - x^2 satisfies the three
  // interpolation conditions one might guess from the segment endpoints yet
  // overestimates phi in between: at x = 3/4 it gives -5/16 > -7/16.
  const double bogus = -2.0 + 3.0 * 0.75 - 0.75 * 0.75;
  CHECK(bogus > quad_1d_phi(-1.0, -1.0, 0.75) + 0.1);

  for (double x : {0.25, 0.5, 0.75}) {
    const QuadraticDualOutcome out = solve_quadratic_dual(lp, vec1(x));
    REQUIRE(out.kind == DualStatusKind::Value);
    CHECK(out.value <= quad_1d_phi(-1.0, -1.0, x) + 1e-5);
    for (int k = 0; k <= 100; ++k) {
      const double t = k / 100.0;
      CHECK(certificate_value(out.cert, vec1(t)) <= quad_1d_phi(-1.0, -1.0, t) + 1e-5);
    }
  }
}

TEST_CASE("convex-restricted search keeps the pinned value and goes psd") {
  const LiftedProgram lp = make_quad_1d(0.0, 1.0);
  const Vector x1 = vec1(0.5);
  const AffineDualOutcome at_x1 = evaluate_lifted_envelope(lp, x1);
  REQUIRE(at_x1.kind == DualStatusKind::Value);
  const double target = at_x1.value;

  const QuadraticDualOutcome out = search_convex_quadratic(lp, x1, target, vec1(1.0));
  REQUIRE(out.kind == DualStatusKind::Value);
  Eigen::SelfAdjointEigenSolver<Matrix> es(out.cert.W);
  CHECK(es.eigenvalues().minCoeff() >= -1e-6);
  CHECK(certificate_value(out.cert, x1) == doctest::Approx(target).epsilon(1e-6));
  // Convex certificate stays below phi everywhere on the segment.
  for (int k = 0; k <= 50; ++k) {
    const double t = k / 50.0;
    CHECK(certificate_value(out.cert, vec1(t)) <= quad_1d_phi(0.0, 1.0, t) + 1e-4);
  }
}

TEST_CASE("convex search reports infeasibility of impossible pins") {
  const LiftedProgram lp = make_quad_1d(0.0, 1.0);
  // phi(1/2) = 1/4; no underestimator can pass through 10 there.
  const QuadraticDualOutcome out = search_convex_quadratic(lp, vec1(0.5), 10.0, vec1(1.0));
  CHECK(out.kind == DualStatusKind::Infeasible);
}

TEST_CASE("2d family: affine dual underestimates the interior value") {
  const LiftedProgram lp = make_quad_2d();
  Vector x(2);
  x << 0.25, 0.25;
  REQUIRE(quad_2d_in_dom(x));
  const ExtendedValue phi = quad_2d_phi(x);
  REQUIRE(phi.is_finite());
  const AffineDualOutcome out = evaluate_lifted_envelope(lp, x, 1e-6, 400);
  REQUIRE(out.kind == DualStatusKind::Value);
  // Underestimation plus a crude floor: phi >= -2||x|| ||y|| on the domain.
  CHECK(out.value <= phi.value() + 1e-4);
  CHECK(out.value >= -1.0);
}

TEST_CASE("2d closed form agrees with a direct scan of the inner problem") {
  const Matrix C = quad_2d_C();
  Vector x(2);
  x << 0.3, 0.2;
  const double t = 1.0 - x.sum();
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 4000; ++k) {
    const double s = t * k / 4000.0;
    Vector y(2);
    y << s, t - s;
    const double v = -2.0 * x.dot(y) + y.dot(C * y);
    best = std::min(best, v);
  }
  const ExtendedValue phi = quad_2d_phi(x);
  REQUIRE(phi.is_finite());
  CHECK(phi.value() == doctest::Approx(best).epsilon(1e-5));

  Vector outside(2);
  outside << 0.7, 0.7;
  CHECK_FALSE(quad_2d_in_dom(outside));
  CHECK_FALSE(quad_2d_phi(outside).is_finite());
}
