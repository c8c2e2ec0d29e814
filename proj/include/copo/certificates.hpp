#pragma once

#include "copo/types.hpp"

namespace copo {

// Dual certificate of an affine underestimator of a block value function.
// Induced function: x -> -alpha - 2 w'x - 2 epsilon ||w||_2. Validity comes
// from set-copositivity of [[alpha, w'], [w, A]] over cone({1} x F); the
// epsilon term is the regularization penalty baked into the constant.
// Ray certificates (is_ray) use the matrix [[alpha, w'], [w, 0]] and induce
// the feasibility cut -alpha - 2 w'x <= 0 on conv F; epsilon is 0 for them.
struct EnvelopeCertificate {
  double alpha = 0.0;
  Vector w;
  double epsilon = 0.0;
  bool is_ray = false;
};

inline double certificate_value(const EnvelopeCertificate& cert, const Vector& x) {
  return -cert.alpha - 2.0 * cert.w.dot(x) - 2.0 * cert.epsilon * cert.w.norm();
}

// Dual certificate of a quadratic underestimator of a lifted program's value
// function. Induced function: x -> nu + w'x + x'Wx with nu = b'lambda.
struct QuadraticCertificate {
  Vector lambda;
  Vector w;
  Matrix W;
  double nu = 0.0;
};

inline double certificate_value(const QuadraticCertificate& cert, const Vector& x) {
  return cert.nu + cert.w.dot(x) + x.dot(cert.W * x);
}

}  // namespace copo
