#pragma once

#include "adamlab/gradients.hpp"
#include "adamlab/optimizer.hpp"
#include "adamlab/rng.hpp"

#include <Eigen/Core>

#include <cstdint>

namespace adamlab {

/// u and r after `steps` optimizer steps on gradients drawn from `model`.
struct DistributionRun {
  Eigen::VectorXd u;
  Eigen::VectorXd r;
  std::uint64_t steps = 0;
};

/// Requires steps >= 1. QuadraticExact models are rejected (they need theta).
DistributionRun run_distribution(const GradientModel& model, const AdamParams& params,
                                 std::uint64_t steps, const CounterRng& rng);

}  // namespace adamlab
