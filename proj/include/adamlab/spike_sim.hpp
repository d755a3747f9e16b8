#pragma once

#include "adamlab/gradients.hpp"
#include "adamlab/monitor.hpp"
#include "adamlab/optimizer.hpp"
#include "adamlab/partition.hpp"
#include "adamlab/rng.hpp"
#include "adamlab/snapshot.hpp"
#include "adamlab/statlab.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace adamlab {

// Two-group toy network. Group G holds n_g "feature" parameters, group R
// holds n_r readout parameters; readout j sees feature pi(j) = j mod n_g:
//
//   s_j = a_j + c_j theta_G[pi(j)],   f = 1/(2 n_r) sum_j (s_j theta_R[j] - y_j)^2
//
// with y_j = a_j theta*_R[j]. The G gradient is the exact fit gradient plus a
// CorrelatedSign-like leaf (frozen +-1, fresh +-1 times noise_scale(t)), all
// multiplied by scale(t) and the rare-event multiplier.
struct CouplingSpec {
  double feature_base = 1.0;
  double feature_jitter = 0.1;
  double coupling = 1.0;      // std of c_j
  double target_scale = 1.0;  // std of theta*_R
  double init_noise = 0.01;   // theta_R(0) = theta*_R + init_noise z
};

struct RareEventSpec {
  std::uint64_t step = 300;
  double multiplier = 1e7;
  bool enabled = true;
};

struct StageThresholds {
  double vanish_factor = 1.0;       // vanished: ||g[G]||_inf < eps * vanish_factor
  double correlation_cosine = 0.9;  // consecutive G gradients counted as aligned
  double loss_rise_factor = 2.0;    // elevated: loss > factor * window minimum
  double decay_ratio = 0.1;         // decaying: ||g[G]||_inf < ratio * window max
  std::size_t window = 20;
};

struct SpikeScenario {
  Eigen::Index n_g = 1000;
  Eigen::Index n_r = 10000;
  CouplingSpec objective;
  // The per-step decay of scale(t) stays above sqrt(beta2) so that v keeps
  // up with the shrinking gradients instead of remembering the large ones.
  // r[G] turns bimodal only once the noise fraction drops, after u[G] is
  // already spiked, so G does not drift while its updates still matter.
  ScaleSchedule g_scale{3e-9, 1e-10, 30, 180};
  ScaleSchedule g_noise{10.0, 0.1, 170, 250};
  double r_noise = 1e-3;
  RareEventSpec rare_event;
  AdamParams params;
  std::uint64_t steps = 500;
  ModalityThresholds modality;
  StageThresholds stage;
  std::optional<MonitorConfig> monitor;
  std::vector<std::uint64_t> histogram_steps;
  std::optional<std::uint64_t> snapshot_step;  // capture optimizer state after this step
  std::size_t histogram_bins = 101;
  double histogram_range = 1.5;

  /// Defaults with the textbook recursion and eta = 1e-3.
  static SpikeScenario standard();
  /// No vanishing phase and no rare event: G keeps its initial scale and noise 10.
  static SpikeScenario healthy();

  GroupPartition partition() const;
  void validate() const;
};

enum class Stage {
  Undetermined = 0,
  Healthy = 1,
  Vanishing = 2,
  SpikedUpdate = 3,
  CorrelatedVanishing = 4,
  BimodalRatio = 5,
  RareEvent = 6,
  Divergence = 7,
  Decorrelated = 8,
  Recovery = 9,
};

std::string to_string(Stage s);

struct StepRecord {
  std::uint64_t step = 0;
  double loss = 0.0;  // before the update of this step
  double g_l2_g = 0.0;
  double g_inf_g = 0.0;
  double g_l2_r = 0.0;
  double g_inf_r = 0.0;
  ModalityReport u_g;
  ModalityReport r_g;
  double cosine = 0.0;  // between g[G] at this step and the previous one
  double epsilon = 0.0;
  Stage stage = Stage::Undetermined;
};

/// `window` holds the records immediately preceding `rec`, oldest first.
/// Throws std::invalid_argument when it has fewer than 10 entries.
Stage classify_stage(const StepRecord& rec, std::span<const StepRecord> window,
                     const StageThresholds& th);

struct SnapshotHistogram {
  std::uint64_t step = 0;
  Histogram u_g;
  Histogram r_g;
};

struct SpikeTimeline {
  std::vector<StepRecord> records;
  std::vector<AlarmEvent> alarms;
  std::vector<MitigationRecord> mitigations;
  std::vector<SnapshotHistogram> histograms;
  std::optional<OptimizerSnapshot> snapshot;
  std::uint64_t reference_step = 0;  // t*, whether or not the event fired
  bool event_fired = false;
  bool diverged = false;
  std::optional<std::uint64_t> diverged_at;
  std::optional<std::uint64_t> vanish_step;      // first step with ||g[G]||_inf below threshold
  std::optional<std::uint64_t> explosion_step;   // first step after vanishing back above it
  std::optional<std::uint64_t> loss_spike_step;  // first step at or after t* above rise * baseline
  std::optional<std::uint64_t> recovery_step;    // first step after the spike back under 1.1 baseline
  bool r_bimodal_before_event = false;           // in [t* - 10, t*)
  double baseline_loss = 0.0;                    // median over [t* - 50, t*)
  double peak_loss = 0.0;                        // max over [t*, end]
  double post_event_distance = 1.0;              // min histogram distance u[G] vs r[G], [t*, t* + 10]
  std::optional<std::uint64_t> first_alarm(AlarmKind kind) const;
};

SpikeTimeline run_spike_scenario(const SpikeScenario& sc, const CounterRng& rng);

struct ChainGain {
  double analytic = 0.0;  // 1 / eps
  double finite_difference = 0.0;
};

/// Slope at 0 of x / (|x| + eps). Throws UnsupportedError for eps == 0.
ChainGain chain_reaction_gain(double epsilon);

}  // namespace adamlab
