#include "copo/instance.hpp"

#include <Eigen/Eigenvalues>

namespace copo {

void validate_instance(const BlockQcqpInstance& inst) {
  if (inst.S <= 0 || inst.n <= 0) throw std::invalid_argument("instance: S and n must be positive");
  const Index N = inst.S * inst.n;
  if (inst.A.rows() != N || inst.A.cols() != N)
    throw std::invalid_argument("instance: A must be (S n) x (S n)");
  if (inst.a.size() != N) throw std::invalid_argument("instance: a must have length S n");
  if (!(inst.r > 0.0) || !std::isfinite(inst.r))
    throw std::invalid_argument("instance: r must be positive and finite");
  if (static_cast<Index>(inst.blocks.size()) != inst.S)
    throw std::invalid_argument("instance: block count mismatch");
  Eigen::SelfAdjointEigenSolver<Matrix> es(((inst.A + inst.A.transpose()) / 2.0).eval());
  if (es.eigenvalues().minCoeff() < -1e-8)
    throw std::invalid_argument("instance: coupling matrix A not PSD");
  for (const auto& b : inst.blocks) {
    if (b.A.rows() != inst.n || b.A.cols() != inst.n)
      throw std::invalid_argument("instance: block matrix dimension mismatch");
    if (b.F.n != inst.n) throw std::invalid_argument("instance: block set dimension mismatch");
    validate_set(b.F);
    if (b.witness.size() != inst.n)
      throw std::invalid_argument("instance: block witness missing or wrong length");
    if (!check_membership(b.F, b.witness))
      throw std::invalid_argument("instance: block witness infeasible");
  }
}

ExtendedValue eval_phi_block(const Block& block, const Vector& z, double tol) {
  if (!check_membership(block.F, z, tol)) return ExtendedValue::infinity();
  return ExtendedValue::finite(z.dot(block.A * z));
}

QuadraticForm monolithic_objective(const BlockQcqpInstance& inst) {
  Matrix Q = inst.A;
  for (Index i = 0; i < inst.S; ++i)
    Q.block(i * inst.n, i * inst.n, inst.n, inst.n) += inst.blocks[i].A;
  return QuadraticForm(std::move(Q), inst.a, 0.0);
}

BlockFeasibleSet monolithic_set(const BlockQcqpInstance& inst) {
  BlockFeasibleSet F;
  F.n = inst.S * inst.n;
  F.ball_radius = inst.r;
  F.nonneg = true;
  for (Index i = 0; i < inst.S; ++i) {
    for (const auto& eq : inst.blocks[i].F.quad_eqs) {
      QuadEquality emb;
      emb.D = Matrix::Zero(F.n, F.n);
      emb.D.block(i * inst.n, i * inst.n, inst.n, inst.n) = eq.D;
      emb.rhs = eq.rhs;
      F.quad_eqs.push_back(std::move(emb));
    }
    if (!inst.blocks[i].F.nonneg)
      throw std::invalid_argument("monolithic_set: mixed-sign blocks unsupported");
  }
  return F;
}

ExtendedValue eval_instance_objective(const BlockQcqpInstance& inst, const Vector& x, double tol) {
  if (x.size() != inst.S * inst.n)
    throw std::invalid_argument("eval_instance_objective: dimension mismatch");
  if (x.squaredNorm() > inst.r + tol) return ExtendedValue::infinity();
  double total = x.dot(inst.A * x) + 2.0 * inst.a.dot(x);
  for (Index i = 0; i < inst.S; ++i) {
    const ExtendedValue phi = eval_phi_block(inst.blocks[i], block_slice(inst, x, i), tol);
    if (!phi.is_finite()) return ExtendedValue::infinity();
    total += phi.value();
  }
  return ExtendedValue::finite(total);
}

}  // namespace copo
