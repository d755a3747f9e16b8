#pragma once

#include "adamlab/optimizer.hpp"
#include "adamlab/partition.hpp"
#include "adamlab/rng.hpp"
#include "adamlab/statlab.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace adamlab {

// Binary layout, little-endian throughout:
//   "ADSN"  u32 version  u64 n
//   u32 groups, then per group: u32 name length, name bytes, u64 start, u64 length
//   f64 m[n]  f64 v[n]  f64 g[n]
//   u64 checksum = sum of the payload bytes (everything before the footer)
struct OptimizerSnapshot {
  static constexpr std::uint32_t kVersion = 1;

  GroupPartition partition;
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  Eigen::VectorXd g;

  Eigen::Index size() const { return m.size(); }
  static OptimizerSnapshot capture(const AdamState<double>& state, const Eigen::VectorXd& g,
                                   const GroupPartition& partition);
  void validate() const;
};

void write_snapshot(std::ostream& os, const OptimizerSnapshot& snap);
/// Throws CorruptionError (BadMagic, UnsupportedVersion, Truncated,
/// ChecksumMismatch or Malformed).
OptimizerSnapshot read_snapshot(std::istream& is);

/// File variants; writing goes through a temporary file and a rename.
void save_snapshot(const std::string& path, const OptimizerSnapshot& snap);
OptimizerSnapshot load_snapshot(const std::string& path);

struct GroupAnalysis {
  std::string group;
  Eigen::Index size = 0;
  SampleSummary ratio;
  SampleSummary update;  // u = m / (sqrt(v) + epsilon), 0/0 mapped to 0
  std::optional<ModalityReport> ratio_modality;  // groups of >= 100 parameters
  std::optional<ModalityReport> update_modality;
  double grad_l2_norm = 0.0;
  double grad_inf_norm = 0.0;
  double m_l2_norm = 0.0;
  double m_inf_norm = 0.0;
  double v_l2_norm = 0.0;
  double v_inf_norm = 0.0;
  double sqrt_v_max = 0.0;
  bool vanishing = false;  // ||g||_inf < epsilon
  bool flagged = false;    // vanishing or r bimodal
};

std::vector<GroupAnalysis> analyze_snapshot(const OptimizerSnapshot& snap, const ModalityThresholds& th,
                                            const CounterRng& rng, double epsilon = 1e-8);

}  // namespace adamlab
