#pragma once

#include "config.hpp"
#include "report.hpp"

#include "adamlab/rng.hpp"

#include <string>
#include <vector>

namespace adamlab::cli {

struct RunContext {
  ConfigMap& root;
  CounterRng rng;
  Format format = Format::Json;
};

std::vector<Artifact> run_dist(RunContext& ctx);
std::vector<Artifact> run_trace(RunContext& ctx);
std::vector<Artifact> run_rmt(RunContext& ctx);
std::vector<Artifact> run_divergence(RunContext& ctx);
std::vector<Artifact> run_spike(RunContext& ctx, bool with_monitor);
std::vector<Artifact> run_analyze(RunContext& ctx, const std::string& snapshot_path);

}  // namespace adamlab::cli
