#include "copo/generator.hpp"

#include "copo/global_solver.hpp"
#include "copo/rng.hpp"

#include <stdexcept>
#include <utility>

namespace copo {

namespace {

constexpr int kMaxRetries = 50;

Matrix draw_matrix(Rng& rng, Index rows, Index cols, double lo, double hi) {
  Matrix M(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) M(i, j) = rng.uniform(lo, hi);
  return M;
}

Matrix draw_psd(Rng& rng, Index n) {
  const Matrix raw = draw_matrix(rng, n, n, -0.5, 0.5);
  return (raw * raw.transpose() / 4.0).eval();
}

// Tries to find any feasible point of F; empty vector on infeasibility.
Vector feasibility_probe(const BlockFeasibleSet& F) {
  const QuadraticForm zero{Matrix::Zero(F.n, F.n), Vector::Zero(F.n), 0.0};
  GlobalConfig cfg;
  cfg.stop_at_first_feasible = true;
  const GlobalResult gr = solve_global(zero, F, cfg);
  if (gr.kind == GlobalStatusKind::Infeasible || gr.minimizer.size() == 0) return Vector();
  return gr.minimizer;
}

}  // namespace

BlockQcqpInstance generate_instance(const GeneratorConfig& cfg) {
  if (cfg.S < 1 || cfg.n < 1 || cfg.m < 1)
    throw std::invalid_argument("generate_instance: S, n, m must all be >= 1");
  Rng rng(cfg.seed);
  const Index N = cfg.S * cfg.n;

  BlockQcqpInstance inst;
  inst.S = cfg.S;
  inst.n = cfg.n;
  inst.A = draw_psd(rng, N);
  inst.a = draw_matrix(rng, N, 1, -0.5, 0.5).col(0);

  Vector x_feas(N);
  for (Index i = 0; i < cfg.S; ++i) {
    Block block;
    block.A = draw_psd(rng, cfg.n);
    if (cfg.negate_blocks) block.A = (-block.A).eval();
    block.F.n = cfg.n;
    block.F.nonneg = true;
    // Any entry of D is at least 2, so z'Dz = 1 forces ||z||^2 <= 1/2: a unit
    // ball keeps the probe sets compact without ever binding.
    block.F.ball_radius = 1.0;
    for (Index j = 0; j < cfg.m; ++j) {
      bool accepted = false;
      for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
        Vector d(cfg.n);
        for (Index l = 0; l < cfg.n; ++l) d(l) = rng.uniform(2.0, 3.0);
        QuadEquality eq{Matrix(d.asDiagonal()), 1.0};
        block.F.quad_eqs.push_back(eq);
        const Vector probe = feasibility_probe(block.F);
        if (probe.size() == cfg.n) {
          block.witness = probe;
          accepted = true;
          break;
        }
        block.F.quad_eqs.pop_back();
      }
      if (!accepted)
        throw std::runtime_error(
            "generate_instance: feasibility probe failed 50 consecutive times");
    }
    x_feas.segment(i * cfg.n, cfg.n) = block.witness;
    inst.blocks.push_back(std::move(block));
  }

  inst.r = 2.0 * x_feas.dot(x_feas);
  // Every point of a block set has squared norm at most 1/2 < r, so widening
  // the block balls to the shared radius changes nothing geometrically while
  // keeping one consistent radius in the file.
  for (Block& block : inst.blocks) block.F.ball_radius = inst.r;
  validate_instance(inst);
  return inst;
}

}  // namespace copo
