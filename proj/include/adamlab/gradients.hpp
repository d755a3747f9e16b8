#pragma once

#include "adamlab/partition.hpp"
#include "adamlab/quadratic.hpp"
#include "adamlab/rng.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace adamlab {

// Leaf processes. Each draw is g[i,t] = frozen[i] + fresh[i,t]; the frozen
// part is drawn once per coordinate, the fresh part every step.
struct IidSign {};                     // fresh +-1
struct CorrelatedSign {                // frozen +-rho, fresh +-1
  double rho = 0.0;
};
struct IidGaussian {                   // fresh N(0, sigma^2)
  double sigma = 1.0;
};
struct CorrelatedGaussian {            // frozen N(0, rho^2), fresh N(0, sigma^2)
  double rho = 0.0;
  double sigma = 1.0;
};
struct Constant {                      // frozen g0, no fresh part
  double g0 = 1.0;
};

using LeafModel = std::variant<IidSign, CorrelatedSign, IidGaussian, CorrelatedGaussian, Constant>;

/// Log-linear ramp from `from` (t <= start) to `to` (t >= stop).
struct ScaleSchedule {
  double from = 1.0;
  double to = 1.0;
  std::uint64_t start = 0;
  std::uint64_t stop = 0;

  static ScaleSchedule constant(double s) { return {s, s, 0, 0}; }
  double operator()(std::uint64_t t) const;
  void validate() const;
};

struct Layer {
  std::string group;
  LeafModel model;
  ScaleSchedule scale;        // multiplies the whole draw
  ScaleSchedule noise_scale;  // multiplies the fresh part only
};

struct Layered {
  GroupPartition partition;
  std::vector<Layer> layers;  // one per partition group, matched by label
};

/// Exact gradient H(theta - theta*) plus optional +-noise sign noise.
struct QuadraticExact {
  std::shared_ptr<const QuadraticObjective<double>> objective;
  double noise = 0.0;
};

using ModelVariant = std::variant<IidSign, CorrelatedSign, IidGaussian, CorrelatedGaussian,
                                  Constant, QuadraticExact, Layered>;

struct RareEvent {
  std::uint64_t step = 0;
  std::string group;
  double multiplier = 1.0;
};

struct MomentSpec {
  double mean = 0.0;
  double variance = 0.0;
  double time_autocorrelation = 0.0;
};

class GradientModel {
 public:
  /// Throws std::invalid_argument on bad parameters or an unknown group label
  /// in a rare event. `partition` names the groups of non-layered models and
  /// defaults to a single group "all".
  GradientModel(Eigen::Index n, ModelVariant variant, int batch_size = 1,
                std::vector<RareEvent> rare_events = {}, GroupPartition partition = {});

  Eigen::Index size() const { return n_; }
  const ModelVariant& variant() const { return variant_; }
  int batch_size() const { return batch_; }
  const std::vector<RareEvent>& rare_events() const { return events_; }
  const GroupPartition& partition() const { return partition_; }

  /// Magnitude multiplier for `group` at step t: scale schedule times any
  /// rare-event multiplier.
  double group_factor(std::size_t group, std::uint64_t t) const;
  double event_multiplier(std::size_t group, std::uint64_t t) const;

 private:
  Eigen::Index n_;
  ModelVariant variant_;
  int batch_;
  std::vector<RareEvent> events_;
  GroupPartition partition_;
};

/// g_t for every model except QuadraticExact (which needs theta).
Eigen::VectorXd sample(const GradientModel& model, std::uint64_t t, const CounterRng& rng);
void sample_into(const GradientModel& model, std::uint64_t t, const CounterRng& rng,
                 Eigen::Ref<Eigen::VectorXd> out);

/// g_t at parameters theta; QuadraticExact uses theta, other variants ignore it.
Eigen::VectorXd gradient(const GradientModel& model, std::uint64_t t, const CounterRng& rng,
                         const Eigen::Ref<const Eigen::VectorXd>& theta);

/// Stationary moments pooled over coordinates (for Layered, at step t).
MomentSpec expected_moments(const GradientModel& model, std::uint64_t t = 1);
MomentSpec expected_moments(const LeafModel& leaf, int batch_size = 1);

std::string variant_name(const ModelVariant& v);

}  // namespace adamlab
