#include "copo/cut_pool.hpp"

namespace copo {

Vector lift_point(const Vector& u) {
  Vector z(u.size() + 1);
  z[0] = 1.0;
  z.tail(u.size()) = u;
  return z;
}

AddCutOutcome CutPool::add(const BlockFeasibleSet& F, const Vector& z, double tol) {
  if (z.size() != n_ + 1 || F.n != n_) return AddCutOutcome::Invalid;
  const double z0 = z[0];
  if (std::abs(z0 - 1.0) <= tol) {
    if (!check_membership(F, z.tail(n_), tol)) return AddCutOutcome::Invalid;
  } else if (std::abs(z0) <= tol) {
    // Compact F: the only recession direction of cone({1} x F) is zero.
    if (z.tail(n_).norm() > tol) return AddCutOutcome::Invalid;
    return AddCutOutcome::Invalid;  // zero vector encodes no cut
  } else {
    return AddCutOutcome::Invalid;
  }
  for (const auto& zc : cuts_)
    if ((zc - z).lpNorm<Eigen::Infinity>() <= 1e-9) return AddCutOutcome::Duplicate;
  cuts_.push_back(z);
  return AddCutOutcome::Added;
}

}  // namespace copo
