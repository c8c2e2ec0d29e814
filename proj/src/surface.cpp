#include "copo/surface.hpp"

#include "copo/envelope.hpp"
#include "copo/global_solver.hpp"
#include "copo/quadratic_dual.hpp"
#include "copo/serialization.hpp"

#include <sstream>
#include <stdexcept>

namespace copo {

namespace {

// Restriction of a ground set to u_j = c for parameter coordinates: on a
// nonnegative ground set the quadratic row u_j^2 = c^2 pins the coordinate.
BlockFeasibleSet pin_parameters(const BlockFeasibleSet& ground, const Vector& x) {
  if (!ground.nonneg)
    throw std::invalid_argument("pin_parameters: ground set must be sign-constrained");
  BlockFeasibleSet F = ground;
  for (Index j = 0; j < x.size(); ++j) {
    Matrix D = Matrix::Zero(F.n, F.n);
    D(j, j) = 1.0;
    F.quad_eqs.push_back({D, x(j) * x(j)});
  }
  return F;
}

// phi(x) of a lifted program by global minimization of the ground objective
// over the pinned set.
void fill_phi(const LiftedProgram& lp, const Vector& x, SurfaceRow& row) {
  const QuadraticForm form = lifted_matrix_form(lp.Qhat);
  GlobalConfig cfg;
  cfg.gap_tol = 1e-8;
  const GlobalResult gr = solve_global(form, pin_parameters(lp.ground, x), cfg);
  if (gr.kind == GlobalStatusKind::Infeasible) {
    row.phi = ExtendedValue::infinity();
    row.has_phi = true;
  } else if (gr.kind == GlobalStatusKind::Solved && gr.upper.is_finite()) {
    row.phi = ExtendedValue::finite(gr.upper.value());
    row.has_phi = true;
  } else {
    row.has_phi = false;
    row.status = "phi_failed";
  }
}

void fill_envelope_from_outcome(const AffineDualOutcome& out, SurfaceRow& row) {
  switch (out.kind) {
    case DualStatusKind::Value:
      row.envelope = ExtendedValue::finite(out.value);
      row.has_envelope = true;
      break;
    case DualStatusKind::Unbounded:
      row.envelope = ExtendedValue::infinity();
      row.has_envelope = true;
      break;
    default:
      row.has_envelope = false;
      row.status = row.status == "ok" ? "envelope_failed" : row.status + "+envelope_failed";
      break;
  }
}

}  // namespace

SurfaceTable sample_surface_env_simplex(const EnvelopeFixture& fx, const SurfaceOptions& opts) {
  if (opts.grid < 2) throw std::invalid_argument("sample_surface: grid needs at least 2 points");
  SurfaceTable table;
  table.n_x = 1;
  EnvelopeConfig ec;
  ec.tol = opts.tol;
  ec.max_iter = opts.max_iter;
  ec.witness = fx.witness;
  EnvelopeEngine engine(fx.A, fx.F, ec);
  for (int k = 0; k < opts.grid; ++k) {
    const double x = static_cast<double>(k) / (opts.grid - 1);
    SurfaceRow row;
    row.x = Vector::Constant(1, x);
    row.phi = ExtendedValue::finite(fx.phi(x));
    row.has_phi = true;
    const EnvelopeOutcome out = engine.evaluate(fx.embed(x), opts.epsilon);
    if (out.kind == EnvelopeStatusKind::Value) {
      row.envelope = ExtendedValue::finite(out.value);
      row.has_envelope = true;
    } else if (out.kind == EnvelopeStatusKind::UnboundedRay) {
      row.envelope = ExtendedValue::infinity();
      row.has_envelope = true;
    } else {
      row.status = "envelope_failed";
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

SurfaceTable sample_surface_quad_1d(double B, double C, const SurfaceOptions& opts,
                                    const QuadraticCertificate* qhat) {
  if (opts.grid < 2) throw std::invalid_argument("sample_surface: grid needs at least 2 points");
  SurfaceTable table;
  table.n_x = 1;
  const LiftedProgram lp = make_quad_1d(B, C);
  CutPool pool(lp.ground_dim());
  for (int k = 0; k < opts.grid; ++k) {
    const double x = static_cast<double>(k) / (opts.grid - 1);
    SurfaceRow row;
    row.x = Vector::Constant(1, x);
    fill_phi(lp, row.x, row);
    fill_envelope_from_outcome(
        evaluate_lifted_envelope(lp, row.x, opts.tol, opts.max_iter, &pool), row);
    if (qhat) {
      row.has_qhat = true;
      row.qhat = certificate_value(*qhat, row.x);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

SurfaceTable sample_surface_quad_2d(const SurfaceOptions& opts, const QuadraticCertificate* qhat) {
  if (opts.grid < 2) throw std::invalid_argument("sample_surface: grid needs at least 2 points");
  SurfaceTable table;
  table.n_x = 2;
  const LiftedProgram lp = make_quad_2d();
  CutPool pool(lp.ground_dim());
  for (int k1 = 0; k1 < opts.grid; ++k1) {
    for (int k2 = 0; k2 < opts.grid; ++k2) {
      Vector x(2);
      x << static_cast<double>(k1) / (opts.grid - 1), static_cast<double>(k2) / (opts.grid - 1);
      SurfaceRow row;
      row.x = x;
      if (!quad_2d_in_dom(x)) {
        // Outside conv({0} u simplex) both the value function and its
        // envelope are infinite; no solver call needed.
        row.phi = ExtendedValue::infinity();
        row.has_phi = true;
        row.envelope = ExtendedValue::infinity();
        row.has_envelope = true;
        row.status = "offdom";
      } else {
        fill_phi(lp, x, row);
        fill_envelope_from_outcome(
            evaluate_lifted_envelope(lp, x, opts.tol, opts.max_iter, &pool), row);
      }
      if (qhat) {
        row.has_qhat = true;
        row.qhat = certificate_value(*qhat, x);
      }
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

std::string surface_to_csv(const SurfaceTable& table) {
  std::ostringstream out;
  for (Index j = 0; j < table.n_x; ++j) out << 'x' << (j + 1) << ',';
  out << "phi,envelope,qhat,status\n";
  auto put = [&](bool has, const ExtendedValue& v) {
    if (!has)
      out << "na";
    else if (v.is_finite())
      out << format_double(v.value());
    else
      out << "inf";
  };
  for (const SurfaceRow& row : table.rows) {
    for (Index j = 0; j < table.n_x; ++j) out << format_double(row.x(j)) << ',';
    put(row.has_phi, row.phi);
    out << ',';
    put(row.has_envelope, row.envelope);
    out << ',';
    if (row.has_qhat)
      out << format_double(row.qhat);
    else
      out << "na";
    out << ',' << row.status << '\n';
  }
  return out.str();
}

}  // namespace copo
