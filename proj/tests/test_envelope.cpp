#include "copo/copositivity.hpp"
#include "copo/envelope.hpp"
#include "copo/fixtures.hpp"

#include <doctest.h>

#include <cmath>

using namespace copo;

namespace {

Matrix bordered(double alpha, const Vector& w, const Matrix& A) {
  const Index n = w.size();
  Matrix M(n + 1, n + 1);
  M(0, 0) = alpha;
  M.block(0, 1, 1, n) = w.transpose();
  M.block(1, 0, n, 1) = w;
  M.block(1, 1, n, n) = A;
  return M;
}

}  // namespace

TEST_CASE("convex block: envelope equals the value function") {
  const EnvelopeFixture fx = make_env_simplex(1.0);
  EnvelopeConfig cfg;
  cfg.witness = fx.witness;
  EnvelopeEngine eng(fx.A, fx.F, cfg);
  for (double x : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const EnvelopeOutcome out = eng.evaluate(fx.embed(x), 0.0);
    REQUIRE(out.kind == EnvelopeStatusKind::Value);
    CHECK(std::abs(out.value - fx.envelope(x)) <= 1e-4);
  }
}

TEST_CASE("concave block: envelope is the secant") {
  const EnvelopeFixture fx = make_env_simplex(-1.0);
  EnvelopeConfig cfg;
  cfg.witness = fx.witness;
  EnvelopeEngine eng(fx.A, fx.F, cfg);
  for (double x : {0.0, 0.5, 1.0}) {
    const EnvelopeOutcome out = eng.evaluate(fx.embed(x), 0.0);
    REQUIRE(out.kind == EnvelopeStatusKind::Value);
    CHECK(std::abs(out.value - fx.envelope(x)) <= 1e-4);
  }
}

TEST_CASE("certificates returned by evaluate are oracle-verified underestimators") {
  const EnvelopeFixture fx = make_env_simplex(-1.0);
  const Vector x = fx.embed(0.3);
  const EnvelopeOutcome out = evaluate_envelope(fx.A, fx.F, x, 0.0);
  REQUIRE(out.kind == EnvelopeStatusKind::Value);
  CHECK(certificate_value(out.cert, x) == doctest::Approx(out.value).epsilon(1e-9));
  const CopositivityResult ver =
      check_set_copositivity(bordered(out.cert.alpha, out.cert.w, fx.A), fx.F, 1e-5);
  CHECK(ver.nonnegative);
  // Affine minorant property on a grid of the segment.
  for (int k = 0; k <= 20; ++k) {
    const double t = k / 20.0;
    CHECK(certificate_value(out.cert, fx.embed(t)) <= fx.phi(t) + 1e-5);
  }
}

TEST_CASE("regularization never increases the evaluated value") {
  const EnvelopeFixture fx = make_env_simplex(1.0);
  EnvelopeConfig cfg;
  cfg.witness = fx.witness;
  EnvelopeEngine eng(fx.A, fx.F, cfg);
  for (double x : {0.1, 0.5, 0.9}) {
    const EnvelopeOutcome plain = eng.evaluate(fx.embed(x), 0.0);
    const EnvelopeOutcome reg = eng.evaluate(fx.embed(x), 0.05);
    REQUIRE(plain.kind == EnvelopeStatusKind::Value);
    REQUIRE(reg.kind == EnvelopeStatusKind::Value);
    CHECK(reg.value <= plain.value + 1e-6);
  }
}

TEST_CASE("outside the domain the plain dual is unbounded and a ray exists") {
  const EnvelopeFixture fx = make_env_simplex(1.0);
  Vector x_out(2);
  x_out << 0.55, 0.55;  // e'x > 1: off conv F
  EnvelopeConfig cfg;
  cfg.witness = fx.witness;
  EnvelopeEngine eng(fx.A, fx.F, cfg);

  const EnvelopeOutcome plain = eng.evaluate(x_out, 0.0);
  CHECK(plain.kind == EnvelopeStatusKind::UnboundedRay);

  const EnvelopeOutcome ray = eng.improving_ray(x_out);
  REQUIRE(ray.kind == EnvelopeStatusKind::Value);
  CHECK(ray.cert.is_ray);
  CHECK(ray.value > 1e-6);
  // The ray certificate stays nonpositive across conv F: check the vertices.
  for (double t : {0.0, 1.0}) {
    const Vector z = fx.embed(t);
    CHECK(-ray.cert.alpha - 2.0 * ray.cert.w.dot(z) <= 1e-6);
  }
  // And strictly positive at the queried point, which is the cut it encodes.
  CHECK(-ray.cert.alpha - 2.0 * ray.cert.w.dot(x_out) == doctest::Approx(ray.value));
}

TEST_CASE("no improving ray exists inside the domain") {
  const EnvelopeFixture fx = make_env_simplex(1.0);
  const EnvelopeOutcome ray = find_improving_ray(fx.F, fx.embed(0.5));
  CHECK(ray.kind == EnvelopeStatusKind::Failed);
}

TEST_CASE("vertex evaluations are exact") {
  const EnvelopeFixture fx = make_env_simplex(1.0);
  const EnvelopeOutcome out = evaluate_envelope(fx.A, fx.F, fx.embed(1.0), 0.0);
  REQUIRE(out.kind == EnvelopeStatusKind::Value);
  CHECK(std::abs(out.value - 0.0) <= 1e-5);
}

TEST_CASE("engine reuses its pool across evaluations") {
  const EnvelopeFixture fx = make_env_simplex(-2.0);
  EnvelopeConfig cfg;
  cfg.witness = fx.witness;
  EnvelopeEngine eng(fx.A, fx.F, cfg);
  const EnvelopeOutcome first = eng.evaluate(fx.embed(0.25), 0.0);
  REQUIRE(first.kind == EnvelopeStatusKind::Value);
  const std::size_t pool_after_first = eng.pool().size();
  const EnvelopeOutcome second = eng.evaluate(fx.embed(0.75), 0.0);
  REQUIRE(second.kind == EnvelopeStatusKind::Value);
  CHECK(eng.pool().size() >= pool_after_first);
  CHECK(std::abs(second.value - fx.envelope(0.75)) <= 1e-4);
}

TEST_CASE("grid property: evaluated values never exceed the true function") {
  for (double b : {1.5, -1.5}) {
    const EnvelopeFixture fx = make_env_simplex(b);
    EnvelopeConfig cfg;
    cfg.witness = fx.witness;
    EnvelopeEngine eng(fx.A, fx.F, cfg);
    for (int k = 0; k <= 10; ++k) {
      const double x = k / 10.0;
      const EnvelopeOutcome out = eng.evaluate(fx.embed(x), 0.0);
      REQUIRE(out.kind == EnvelopeStatusKind::Value);
      CHECK(out.value <= fx.phi(x) + 1e-5);
      CHECK(out.value >= fx.envelope(x) - 1e-4);
    }
  }
}

TEST_CASE("seeding fills the pool with members of the lifted cone") {
  const EnvelopeFixture fx = make_env_simplex(1.0);
  CutPool pool(2);
  seed_cut_pool(pool, fx.F, 10, 99, fx.witness);
  CHECK(pool.size() >= 5);
  for (const Vector& z : pool.cuts()) {
    CHECK(z(0) == doctest::Approx(1.0));
    CHECK(check_membership(fx.F, z.tail(2), 1e-5));
  }
}
