#include "adamlab/distribution.hpp"

#include <stdexcept>
#include <variant>

namespace adamlab {

DistributionRun run_distribution(const GradientModel& model, const AdamParams& params,
                                 std::uint64_t steps, const CounterRng& rng) {
  params.validate();
  if (steps < 1) throw std::invalid_argument("distribution run needs steps >= 1");
  if (std::holds_alternative<QuadraticExact>(model.variant()))
    throw std::invalid_argument("distribution run needs a theta-free gradient model");
  AdamState<double> state(model.size());
  Eigen::VectorXd g(model.size());
  UpdateVector<double> u;
  for (std::uint64_t t = 1; t <= steps; ++t) {
    sample_into(model, t, rng, g);
    u = advance(state, g, params);
  }
  return {std::move(u.u), ratio(state.m, state.v), steps};
}

}  // namespace adamlab
