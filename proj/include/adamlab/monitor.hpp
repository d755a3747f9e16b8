#pragma once

#include "adamlab/optimizer.hpp"
#include "adamlab/partition.hpp"
#include "adamlab/rng.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace adamlab {

struct Mitigation {
  enum class Kind { None, ZeroGuard, ReinitState, RetuneEpsilon, ReduceBetas };
  Kind kind = Kind::None;
  double new_epsilon = 0.0;  // RetuneEpsilon
  double beta1 = 0.0;        // ReduceBetas
  double beta2 = 0.0;
};

std::string to_string(Mitigation::Kind k);
Mitigation::Kind mitigation_from_string(const std::string& s);

struct MonitorConfig {
  double dip_threshold_p = 0.01;
  int vanish_window = 20;       // W: consecutive vanishing checks before the alarm
  double vanish_factor = 1.0;   // c_v: vanishing means ||g[G]||_inf < eps * c_v
  int bimodal_window = 3;       // consecutive bimodal checks before the alarm
  int check_period = 1;
  std::uint64_t warmup_steps = 20;  // r is trivially +-1 while the moments are young
  std::size_t n_boot = 200;
  std::vector<std::string> groups;  // watched groups; empty watches all
  Mitigation mitigation;

  void validate() const;
};

enum class AlarmKind { VanishingGradients, BimodalRatio, ImpendingSpike };

std::string to_string(AlarmKind k);

struct AlarmEvent {
  std::uint64_t step = 0;
  std::string group;
  AlarmKind kind = AlarmKind::VanishingGradients;
  std::optional<double> dip;
  std::optional<double> dip_p;
  double grad_inf_norm = 0.0;
  double grad_l2_norm = 0.0;
  int vanish_run = 0;
};

/// Rolling per-group state carried between observe() calls.
struct MonitorState {
  struct Track {
    int vanish_run = 0;
    int bimodal_run = 0;
    bool vanishing = false;
    bool bimodal = false;
    bool impending = false;
  };
  std::vector<Track> tracks;  // one per partition group
  std::uint64_t last_step = 0;
};

struct StepSnapshot {
  std::uint64_t step = 0;
  const Eigen::VectorXd* g = nullptr;
  const AdamState<double>* state = nullptr;
  const GroupPartition* partition = nullptr;
  double epsilon = 0.0;  // optimizer epsilon in effect at this step
};

/// Emits alarms on the rising edge of each condition. Throws
/// std::invalid_argument when the snapshot and partition disagree.
std::vector<AlarmEvent> observe(MonitorState& ms, const MonitorConfig& cfg,
                                const StepSnapshot& snap, const CounterRng& rng);

struct MitigationRecord {
  std::uint64_t step = 0;
  std::string group;
  Mitigation::Kind kind = Mitigation::Kind::None;
  bool applied = false;
  std::string note;
};

/// Requires trigger.kind == ImpendingSpike. Incompatible requests leave
/// params and state untouched and return a record with applied = false.
MitigationRecord apply_mitigation(AdamParams& params, AdamState<double>& state,
                                  const GroupPartition& partition, const Mitigation& mitigation,
                                  const AlarmEvent& trigger);

}  // namespace adamlab
