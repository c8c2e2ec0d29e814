#pragma once

#include "copo/instance.hpp"
#include "copo/types.hpp"

#include <cstdint>

namespace copo {

// Random block instances: coupling A = A~ A~'/4 (PSD) and block matrices from
// the same recipe, raw entries uniform in [-0.5, 0.5]; linear term uniform in
// [-0.5, 0.5]; per block m diagonal equality constraints z'Dz = 1 with
// diagonal entries uniform in [2, 3], accepted one by one only when the block
// stays feasible; finally r = 2 x_feas'x_feas from the concatenated block
// witnesses. Deterministic per seed.
struct GeneratorConfig {
  Index S = 1;
  Index n = 2;
  Index m = 1;
  std::uint64_t seed = 0;
  bool negate_blocks = false;  // flip block matrices to stress nonconvexity
};

// Throws std::runtime_error when a constraint slot fails its feasibility
// probe 50 consecutive times.
BlockQcqpInstance generate_instance(const GeneratorConfig& cfg);

}  // namespace copo
