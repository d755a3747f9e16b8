#include "config.hpp"
#include "experiments.hpp"
#include "report.hpp"

#include "adamlab/errors.hpp"
#include "adamlab/io.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>

namespace {

using namespace adamlab;
using namespace adamlab::cli;

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kIo = 3, kNumerical = 4, kCorrupt = 5 };

struct Options {
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  std::string format;
  std::string snapshot;
};

// Top-level keys accepted by each experiment besides experiment/seed/output.
const std::map<std::string, std::vector<std::string>> kBlocks = {
    {"dist", {"dist", "optimizer", "modality"}},
    {"trace", {"trace", "optimizer", "modality"}},
    {"rmt", {"rmt"}},
    {"divergence", {"divergence", "optimizer"}},
    {"spike", {"spike", "optimizer", "modality", "monitor"}},
    {"monitor", {"spike", "optimizer", "modality", "monitor"}},
    {"analyze-snapshot", {"analyze", "modality"}},
};

int run(const std::string& experiment, const Options& opt, bool seed_flag) {
  const std::string text = opt.config.empty() ? std::string() : read_file(opt.config);
  ConfigMap root = ConfigMap::parse(text, opt.config.empty() ? "<no config>" : opt.config);

  auto keys = kBlocks.at(experiment);
  keys.insert(keys.end(), {"experiment", "seed", "output"});
  root.restrict_to(keys, "experiment '" + experiment + "'");

  const std::string declared = root.text("experiment", experiment);
  if (declared != experiment)
    root.fail("experiment", "config is for '" + declared + "' but the subcommand is '" + experiment + "'");

  RunInfo info;
  info.experiment = experiment;
  info.config_hash = hex64(fnv1a64(text));
  const auto cfg_seed = root.optional_count("seed");
  info.seeded = seed_flag || cfg_seed.has_value();
  if (!info.seeded) throw ConfigError("a seed is required: set 'seed' in the config or pass --seed");
  info.seed = seed_flag ? opt.seed : *cfg_seed;

  ConfigMap out = root.map("output");
  std::string dir = out.text("dir", "out");
  std::string fmt = out.choice("format", "json", {"csv", "json"});
  out.finish();
  if (!opt.out.empty()) dir = opt.out;
  if (!opt.format.empty()) fmt = opt.format;
  info.format = fmt == "csv" ? Format::Csv : Format::Json;

  RunContext ctx{root, CounterRng(info.seed), info.format};
  std::vector<Artifact> artifacts;
  if (experiment == "dist") artifacts = run_dist(ctx);
  else if (experiment == "trace") artifacts = run_trace(ctx);
  else if (experiment == "rmt") artifacts = run_rmt(ctx);
  else if (experiment == "divergence") artifacts = run_divergence(ctx);
  else if (experiment == "spike") artifacts = run_spike(ctx, false);
  else if (experiment == "monitor") artifacts = run_spike(ctx, true);
  else artifacts = run_analyze(ctx, opt.snapshot);
  root.finish();

  emit(dir, artifacts, info);
  for (const auto& a : artifacts) std::cout << dir << "/" << a.file << "\n";
  return kOk;
}

int report(const char* kind, const std::exception& e, int code) {
  std::cerr << "adamlab: " << kind << ": " << e.what() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical experiments on the update statistics of Adam."};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();

  Options opt;
  app.add_option("--config", opt.config, "YAML experiment config");
  auto* seed = app.add_option("--seed", opt.seed, "64-bit seed, overrides the config");
  app.add_option("--out", opt.out, "output directory, overrides the config");
  app.add_option("--format", opt.format, "artifact format, overrides the config")
      ->check(CLI::IsMember({"csv", "json"}));

  app.add_subcommand("dist", "distribution of u and r under a gradient model");
  app.add_subcommand("trace", "per-step statistics of u and r");
  app.add_subcommand("rmt", "Wigner spectra: semicircle moments or squared-spectrum scaling");
  app.add_subcommand("divergence", "critical step-size scaling, loss trajectories, Hessian proxy");
  app.add_subcommand("spike", "two-group loss-spike simulation");
  app.add_subcommand("monitor", "spike simulation with the instability monitor attached");
  auto* analyze = app.add_subcommand("analyze-snapshot", "per-group analysis of an optimizer snapshot");
  analyze->add_option("snapshot", opt.snapshot, "snapshot file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  const std::string experiment = app.get_subcommands().front()->get_name();
  try {
    return run(experiment, opt, seed->count() > 0);
  } catch (const ConfigError& e) {
    return report("config error", e, kConfig);
  } catch (const YAML::Exception& e) {
    return report("config error", e, kConfig);
  } catch (const IoError& e) {
    return report("I/O error", e, kIo);
  } catch (const NumericalError& e) {
    return report("numerical failure", e, kNumerical);
  } catch (const CorruptionError& e) {
    return report("corrupt input", e, kCorrupt);
  } catch (const std::invalid_argument& e) {
    return report("invalid parameters", e, kConfig);
  } catch (const std::domain_error& e) {
    return report("numerical failure", e, kNumerical);
  } catch (const std::exception& e) {
    return report("error", e, kFailure);
  }
}
