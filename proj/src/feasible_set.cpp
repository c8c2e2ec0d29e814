#include "copo/feasible_set.hpp"

#include "copo/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace copo {

void validate_set(const BlockFeasibleSet& F) {
  if (F.n <= 0) throw std::invalid_argument("BlockFeasibleSet: n must be positive");
  if (!(F.ball_radius > 0.0) || !std::isfinite(F.ball_radius))
    throw std::invalid_argument("BlockFeasibleSet: ball_radius must be positive and finite");
  for (const auto& eq : F.quad_eqs) {
    if (eq.D.rows() != F.n || eq.D.cols() != F.n)
      throw std::invalid_argument("BlockFeasibleSet: equality dimension mismatch");
    if (!std::isfinite(eq.rhs)) throw std::invalid_argument("BlockFeasibleSet: non-finite rhs");
    Eigen::SelfAdjointEigenSolver<Matrix> es(((eq.D + eq.D.transpose()) / 2.0).eval());
    if (es.eigenvalues().minCoeff() < -1e-8)
      throw std::invalid_argument("BlockFeasibleSet: equality matrix not PSD");
  }
}

bool check_membership(const BlockFeasibleSet& F, const Vector& z, double tol) {
  if (z.size() != F.n) throw std::invalid_argument("check_membership: dimension mismatch");
  return membership_residual(F, z) <= tol;
}

double membership_residual(const BlockFeasibleSet& F, const Vector& z) {
  double worst = 0.0;
  if (F.nonneg && z.size() > 0) worst = std::max(worst, -z.minCoeff());
  for (const auto& eq : F.quad_eqs) worst = std::max(worst, std::abs(z.dot(eq.D * z) - eq.rhs));
  worst = std::max(worst, z.squaredNorm() - F.ball_radius);
  return worst;
}

void coordinate_box(const BlockFeasibleSet& F, Vector& lo, Vector& hi) {
  const double root_r = std::sqrt(F.ball_radius);
  hi = Vector::Constant(F.n, root_r);
  for (const auto& eq : F.quad_eqs) {
    // For entrywise-nonnegative D and z in the orthant, z'Dz >= D(l,l) z_l^2.
    if (!F.nonneg) continue;
    if (eq.D.minCoeff() < 0.0 || eq.rhs < 0.0) continue;
    for (Index l = 0; l < F.n; ++l) {
      const double dll = eq.D(l, l);
      if (dll > 1e-14) hi[l] = std::min(hi[l], std::sqrt(eq.rhs / dll));
    }
  }
  lo = F.nonneg ? Vector::Zero(F.n).eval() : (-hi).eval();
}

std::vector<LinearRow> rank_one_rows(const BlockFeasibleSet& F) {
  std::vector<LinearRow> rows;
  if (!F.nonneg) return rows;
  for (std::size_t j = 0; j < F.quad_eqs.size(); ++j) {
    const auto& eq = F.quad_eqs[j];
    Eigen::SelfAdjointEigenSolver<Matrix> es(eq.D);
    const Vector ev = es.eigenvalues();
    if (ev.size() < 1) continue;
    const double lead = ev[ev.size() - 1];
    if (lead <= 1e-12) continue;
    double rest = 0.0;
    for (Index k = 0; k + 1 < ev.size(); ++k) rest = std::max(rest, std::abs(ev[k]));
    if (rest > 1e-10 * lead) continue;
    Vector v = es.eigenvectors().col(ev.size() - 1);
    if (v.maxCoeff() < -v.minCoeff()) v = -v;
    if (v.minCoeff() < -1e-9) continue;  // mixed signs: sign of v'z not determined
    v = v.cwiseMax(0.0);
    if (eq.rhs < 0.0) continue;
    LinearRow row;
    row.v = std::sqrt(lead) * v;
    row.s = std::sqrt(eq.rhs);
    row.source_eq = static_cast<int>(j);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::optional<Vector> project_onto_set(const BlockFeasibleSet& F, Vector z, int max_iter,
                                       double tol) {
  if (z.size() != F.n) throw std::invalid_argument("project_onto_set: dimension mismatch");
  Vector lo, hi;
  coordinate_box(F, lo, hi);
  z = z.cwiseMax(lo).cwiseMin(hi);
  const std::size_t m = F.quad_eqs.size();
  for (int it = 0; it < max_iter; ++it) {
    Vector res(m);
    Matrix J(m, F.n);
    for (std::size_t j = 0; j < m; ++j) {
      res[static_cast<Index>(j)] = z.dot(F.quad_eqs[j].D * z) - F.quad_eqs[j].rhs;
      J.row(static_cast<Index>(j)) = 2.0 * (F.quad_eqs[j].D * z).transpose();
    }
    const double ball_excess = z.squaredNorm() - F.ball_radius;
    if (res.size() > 0 ? (res.cwiseAbs().maxCoeff() <= 0.25 * tol && ball_excess <= 0.25 * tol)
                       : (ball_excess <= 0.25 * tol)) {
      if (check_membership(F, z, tol)) return z;
    }
    Vector step = m > 0 ? Vector(-J.completeOrthogonalDecomposition().solve(res))
                        : Vector(Vector::Zero(F.n));
    if (ball_excess > 0.0 && z.norm() > 1e-12) {
      // Pull back toward the ball surface along -z.
      step -= (ball_excess / (2.0 * z.squaredNorm())) * z;
    }
    if (step.norm() < 1e-15) break;
    // Damped update keeps iterates in the box; full steps first.
    double t = 1.0;
    Vector best = z;
    double best_res = membership_residual(F, z);
    bool improved = false;
    for (int ls = 0; ls < 6; ++ls) {
      Vector cand = (z + t * step).cwiseMax(lo).cwiseMin(hi);
      const double r_cand = membership_residual(F, cand);
      if (r_cand < best_res) {
        best = cand;
        best_res = r_cand;
        improved = true;
        break;
      }
      t *= 0.5;
    }
    if (!improved) break;
    z = best;
  }
  if (check_membership(F, z, tol)) return z;
  return std::nullopt;
}

std::vector<Vector> sample_feasible(const BlockFeasibleSet& F, int count, std::uint64_t seed) {
  std::vector<Vector> out;
  Rng rng(seed);
  Vector lo, hi;
  coordinate_box(F, lo, hi);
  const int budget = 20 * std::max(count, 1);
  for (int attempt = 0; attempt < budget && static_cast<int>(out.size()) < count; ++attempt) {
    Vector z0(F.n);
    for (Index l = 0; l < F.n; ++l) z0[l] = rng.uniform(lo[l], hi[l]);
    if (auto z = project_onto_set(F, z0)) out.push_back(*z);
  }
  return out;
}

}  // namespace copo
