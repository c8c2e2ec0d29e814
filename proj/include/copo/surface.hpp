#pragma once

#include "copo/certificates.hpp"
#include "copo/fixtures.hpp"
#include "copo/types.hpp"

#include <string>
#include <vector>

namespace copo {

// Grid sampling of a value function and its underestimators, emitted as CSV
// with the fixed column order x..., phi, envelope, qhat, status. Infinite
// values print as the "inf" sentinel, artifacts that were not requested as
// "na"; solver failures flag the row's status instead of dropping the row.

struct SurfaceOptions {
  int grid = 101;        // points per axis
  double epsilon = 0.0;  // envelope regularisation
  double tol = 1e-6;
  int max_iter = 200;
};

struct SurfaceRow {
  Vector x;
  ExtendedValue phi = ExtendedValue::infinity();
  ExtendedValue envelope = ExtendedValue::infinity();
  bool has_phi = false;       // false: phi column prints "na"
  bool has_envelope = false;  // false: envelope column prints "na"
  bool has_qhat = false;
  double qhat = 0.0;
  std::string status = "ok";
};

struct SurfaceTable {
  Index n_x = 0;
  std::vector<SurfaceRow> rows;
};

SurfaceTable sample_surface_env_simplex(const EnvelopeFixture& fx, const SurfaceOptions& opts);
SurfaceTable sample_surface_quad_1d(double B, double C, const SurfaceOptions& opts,
                                    const QuadraticCertificate* qhat = nullptr);
SurfaceTable sample_surface_quad_2d(const SurfaceOptions& opts,
                                    const QuadraticCertificate* qhat = nullptr);

std::string surface_to_csv(const SurfaceTable& table);

}  // namespace copo
