#include "experiments.hpp"

#include "adamlab/distribution.hpp"
#include "adamlab/divergence.hpp"
#include "adamlab/gradients.hpp"
#include "adamlab/io.hpp"
#include "adamlab/monitor.hpp"
#include "adamlab/optimizer.hpp"
#include "adamlab/rmt.hpp"
#include "adamlab/snapshot.hpp"
#include "adamlab/spike_sim.hpp"
#include "adamlab/statlab.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace adamlab::cli {

namespace {

using Json = nlohmann::ordered_json;

AdamParams read_optimizer(ConfigMap& root, AdamParams p) {
  ConfigMap m = root.map("optimizer");
  p.beta1 = m.number("beta1", p.beta1);
  p.beta2 = m.number("beta2", p.beta2);
  const std::string policy = m.choice(
      "policy", p.policy == EpsilonPolicy::ZeroGuard ? "zero_guard" : "standard", {"standard", "zero_guard"});
  p.policy = policy == "zero_guard" ? EpsilonPolicy::ZeroGuard : EpsilonPolicy::Standard;
  p.epsilon = m.number("epsilon", p.policy == EpsilonPolicy::ZeroGuard ? 0.0 : p.epsilon);
  const std::string rec = m.choice(
      "recursion", p.recursion == Recursion::Compounded ? "compounded" : "textbook", {"textbook", "compounded"});
  p.recursion = rec == "compounded" ? Recursion::Compounded : Recursion::Textbook;
  if (m.has("eta")) p.eta = constant_step(m.number("eta", 0.0));
  m.finish();
  try {
    p.validate();
    p.step_size(1);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("optimizer: " + std::string(e.what()));
  }
  return p;
}

AdamParams simulation_params() {
  AdamParams p;
  p.recursion = Recursion::Textbook;
  return p;
}

ModalityThresholds read_modality(ConfigMap& root, ModalityThresholds th = {}) {
  ConfigMap m = root.map("modality");
  th.spike_delta = m.number("spike_delta", th.spike_delta);
  th.spike_fraction = m.number("spike_fraction", th.spike_fraction);
  th.bimodal_p = m.number("bimodal_p", th.bimodal_p);
  th.n_boot = m.count("n_boot", th.n_boot);
  th.bins = m.count("bins", th.bins);
  m.finish();
  if (!(th.spike_delta > 0.0)) throw ConfigError("modality.spike_delta must be positive");
  if (!(th.spike_fraction > 0.0 && th.spike_fraction <= 1.0))
    throw ConfigError("modality.spike_fraction must lie in (0, 1]");
  if (!(th.bimodal_p > 0.0 && th.bimodal_p < 1.0)) throw ConfigError("modality.bimodal_p must lie in (0, 1)");
  if (th.n_boot < 1) throw ConfigError("modality.n_boot must be >= 1");
  return th;
}

LeafModel read_leaf(ConfigMap& block) {
  ConfigMap m = block.map("model");
  const std::string kind = m.choice(
      "kind", "iid_sign", {"iid_sign", "correlated_sign", "iid_gaussian", "correlated_gaussian", "constant"});
  LeafModel leaf;
  if (kind == "iid_sign") leaf = IidSign{};
  if (kind == "correlated_sign") leaf = CorrelatedSign{m.number("rho", 0.0)};
  if (kind == "iid_gaussian") leaf = IidGaussian{m.number("sigma", 1.0)};
  if (kind == "correlated_gaussian") {
    CorrelatedGaussian c;
    c.rho = m.number("rho", 0.0);
    c.sigma = m.number("sigma", 1.0);
    leaf = c;
  }
  if (kind == "constant") leaf = Constant{m.number("g0", 1.0)};
  m.finish();
  return leaf;
}

ModelVariant as_variant(const LeafModel& leaf) {
  return std::visit([](const auto& x) -> ModelVariant { return x; }, leaf);
}

Eigen::Index read_size(ConfigMap& m, const std::string& key, std::uint64_t fallback, std::uint64_t min) {
  const std::uint64_t n = m.count(key, fallback);
  if (n < min) m.fail(key, "must be >= " + std::to_string(min));
  return static_cast<Eigen::Index>(n);
}

int read_int(ConfigMap& m, const std::string& key, std::uint64_t fallback, std::uint64_t min) {
  const std::uint64_t n = m.count(key, fallback);
  if (n < min || n > 1000000000) m.fail(key, "must lie in [" + std::to_string(min) + ", 1e9]");
  return static_cast<int>(n);
}

ScaleSchedule read_schedule(ConfigMap& block, const std::string& key, ScaleSchedule s) {
  ConfigMap m = block.map(key);
  s.from = m.number("from", s.from);
  s.to = m.number("to", s.to);
  s.start = m.count("start", s.start);
  s.stop = m.count("stop", s.stop);
  m.finish();
  return s;
}

const std::vector<std::string> kModalityColumns = {"class", "dip", "dip_p", "zero_mass_fraction", "modes"};

void modality_cells(Table& t, const ModalityReport& r) {
  t << to_string(r.cls) << r.dip.dip << maybe(r.dip.p_value) << r.zero_mass_fraction << r.modes;
}

void empty_modality_cells(Table& t) {
  for (std::size_t k = 0; k < kModalityColumns.size(); ++k) t << std::monostate{};
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

void histogram_rows(Table& t, const std::vector<Cell>& lead, const Histogram& h) {
  for (std::size_t k = 0; k < h.bins(); ++k) {
    t.row();
    for (const auto& c : lead) t << c;
    t << h.left(k) << h.right(k) << static_cast<std::uint64_t>(h.counts[k]);
  }
}

Table sample_report(const std::string& name, const std::vector<std::pair<std::string, const Eigen::VectorXd*>>& xs,
                    const ModalityThresholds& th, const CounterRng& rng) {
  Table t(name, concat({"quantity", "n", "mean", "variance", "skewness", "excess_kurtosis", "min", "max"},
                       kModalityColumns));
  std::uint64_t tag = 0;
  for (const auto& [label, x] : xs) {
    const SampleSummary s = summarize(*x);
    t.row() << label << static_cast<std::uint64_t>(s.n) << s.mean << s.variance << s.skewness
            << s.excess_kurtosis << s.min << s.max;
    modality_cells(t, classify_modality(*x, th, rng.substream(++tag)));
  }
  return t;
}

double zero_mass(const Eigen::VectorXd& x, double delta) {
  return static_cast<double>((x.array().abs() < delta).count()) / static_cast<double>(x.size());
}

}  // namespace

std::vector<Artifact> run_dist(RunContext& ctx) {
  ConfigMap blk = ctx.root.map("dist");
  const Eigen::Index n = read_size(blk, "n", 100000, 100);
  const std::uint64_t steps = blk.count("steps", 200);
  const int batch = read_int(blk, "batch_size", 1, 1);
  const LeafModel leaf = read_leaf(blk);
  ConfigMap hm = blk.map("histogram");
  const std::size_t bins = hm.count("bins", 101);
  const double range = hm.number("range", 1.5);
  hm.finish();
  blk.finish();
  if (steps < 1) throw ConfigError("dist.steps must be >= 1");
  if (bins < 1 || !(range > 0.0)) throw ConfigError("dist.histogram needs bins >= 1 and range > 0");
  const AdamParams params = read_optimizer(ctx.root, simulation_params());
  const ModalityThresholds th = read_modality(ctx.root);

  const GradientModel model(n, as_variant(leaf), batch);
  const DistributionRun run = run_distribution(model, params, steps, ctx.rng.substream(1));

  const Table report = sample_report("dist_report", {{"u", &run.u}, {"r", &run.r}}, th, ctx.rng.substream(2));
  Table hist("dist_histogram", {"quantity", "bin_lo", "bin_hi", "count"});
  histogram_rows(hist, {std::string("u")}, histogram(run.u, bins, -range, range));
  histogram_rows(hist, {std::string("r")}, histogram(run.r, bins, -range, range));
  return {render(report, ctx.format), render(hist, ctx.format)};
}

std::vector<Artifact> run_trace(RunContext& ctx) {
  ConfigMap blk = ctx.root.map("trace");
  const Eigen::Index n = read_size(blk, "n", 10000, 1);
  const std::uint64_t steps = blk.count("steps", 500);
  const std::uint64_t every = blk.count("every", 1);
  const int batch = read_int(blk, "batch_size", 1, 1);
  const LeafModel leaf = read_leaf(blk);
  blk.finish();
  if (steps < 1 || every < 1) throw ConfigError("trace.steps and trace.every must be >= 1");
  const AdamParams params = read_optimizer(ctx.root, simulation_params());
  const ModalityThresholds th = read_modality(ctx.root);

  const GradientModel model(n, as_variant(leaf), batch);
  const CounterRng rng = ctx.rng.substream(1);
  AdamState<double> state(n);
  Eigen::VectorXd g(n);
  Table t("trace", {"step", "grad_inf", "u_mean", "u_variance", "u_excess_kurtosis", "u_zero_mass", "r_mean",
                    "r_variance", "r_excess_kurtosis", "r_abs_mean"});
  for (std::uint64_t step = 1; step <= steps; ++step) {
    sample_into(model, step, rng, g);
    const Eigen::VectorXd u = advance(state, g, params).u;
    if (step % every != 0 && step != steps) continue;
    const Eigen::VectorXd r = ratio(state.m, state.v);
    const SampleSummary su = summarize(u), sr = summarize(r);
    t.row() << step << g.cwiseAbs().maxCoeff() << su.mean << su.variance << su.excess_kurtosis
            << zero_mass(u, th.spike_delta) << sr.mean << sr.variance << sr.excess_kurtosis
            << r.cwiseAbs().mean();
  }
  return {render(t, ctx.format)};
}

std::vector<Artifact> run_rmt(RunContext& ctx) {
  ConfigMap blk = ctx.root.map("rmt");
  const std::string mode = blk.choice("mode", "semicircle", {"semicircle", "scaling"});
  const auto ensemble =
      blk.choice("ensemble", "gaussian", {"gaussian", "rademacher"}) == "gaussian" ? WignerEnsemble::Gaussian
                                                                                 : WignerEnsemble::Rademacher;
  std::vector<Artifact> out;
  if (mode == "semicircle") {
    const Eigen::Index n = read_size(blk, "n", 512, 64);
    const int trials = read_int(blk, "trials", 50, 10);
    const std::size_t bins = blk.count("bins", 48);
    blk.forbid("sizes", "only used with mode 'scaling'");
    blk.finish();
    if (bins < 1) throw ConfigError("rmt.bins must be >= 1");
    const SemicircleReport rep = semicircle_check(n, trials, ctx.rng.substream(1), ensemble);
    Table m("rmt_moments", {"n", "trials", "first_moment", "second_moment", "second_moment_target",
                            "beta_second_moment", "mean_square_over_n", "cdf_sup_distance"});
    m.row() << static_cast<std::int64_t>(rep.n) << static_cast<std::int64_t>(rep.trials) << rep.first_moment
            << rep.second_moment << 5.0 / 16.0 << rep.beta_second_moment << rep.mean_square_over_n
            << rep.cdf_sup_distance;
    const Eigen::Map<const Eigen::VectorXd> scaled(rep.scaled.data(), static_cast<Eigen::Index>(rep.scaled.size()));
    const Histogram h = histogram(scaled, bins, -1.2, 1.2);
    Table s("rmt_spectrum", {"bin_lo", "bin_hi", "count", "density", "semicircle_density"});
    for (std::size_t k = 0; k < h.bins(); ++k) {
      const double x = h.center(k);
      const double dens = static_cast<double>(h.counts[k]) / (static_cast<double>(h.total()) * h.width());
      s.row() << h.left(k) << h.right(k) << static_cast<std::uint64_t>(h.counts[k]) << dens
              << (std::abs(x) < 1.0 ? 2.0 / std::numbers::pi * std::sqrt(1.0 - x * x) : 0.0);
    }
    out = {render(m, ctx.format), render(s, ctx.format)};
  } else {
    const auto sizes = blk.counts("sizes", {64, 128, 256, 512});
    const int trials = read_int(blk, "trials", 5, 1);
    blk.forbid("n", "only used with mode 'semicircle'");
    blk.forbid("bins", "only used with mode 'semicircle'");
    blk.finish();
    std::vector<Eigen::Index> ns(sizes.begin(), sizes.end());
    const ScalingReport rep = squared_spectrum_scaling(ns, trials, ctx.rng.substream(2), ensemble);
    Table t("rmt_scaling", {"n", "trials", "mean_eigenvalue", "mean_lambda_sq", "target", "min_eigenvalue",
                            "max_spectrum_mismatch"});
    for (const auto& r : rep.rows)
      t.row() << static_cast<std::int64_t>(r.n) << static_cast<std::int64_t>(rep.trials) << r.mean_eigenvalue
              << r.mean_lambda_sq << r.target << r.min_eigenvalue << r.max_spectrum_mismatch;
    Table f("rmt_scaling_fit", {"slope"});
    f.row() << rep.slope;
    out = {render(t, ctx.format), render(f, ctx.format)};
  }
  return out;
}

std::vector<Artifact> run_divergence(RunContext& ctx) {
  ConfigMap blk = ctx.root.map("divergence");
  const std::string mode = blk.choice("mode", "eta_scaling", {"eta_scaling", "trajectory", "proxy"});
  const AdamParams params = read_optimizer(ctx.root, simulation_params());

  if (mode == "eta_scaling") {
    const auto sizes = blk.counts("sizes", {64, 128, 256, 512, 1024});
    const int trials = read_int(blk, "trials", 20, 20);
    const std::string hess = blk.choice("hessian", "wigner_squared", {"wigner_squared", "identity"});
    blk.finish();
    std::vector<Eigen::Index> ns(sizes.begin(), sizes.end());
    const auto kind = hess == "identity" ? HessianKind::Identity : HessianKind::WignerSquared;
    const EtaScalingReport rep =
        critical_eta_scaling(ns, trials, ctx.rng.substream(1), kind, params.beta1, params.beta2);
    Table t("divergence_eta_scaling", {"hessian", "n", "median_eta", "used", "discarded"});
    for (const auto& r : rep.rows)
      t.row() << hess << static_cast<std::int64_t>(r.n) << r.median_eta << static_cast<std::int64_t>(r.used)
              << static_cast<std::int64_t>(r.discarded);
    Table f("divergence_eta_fit", {"hessian", "slope"});
    f.row() << hess << rep.slope;
    return {render(t, ctx.format), render(f, ctx.format)};
  }

  if (mode == "trajectory") {
    const Eigen::Index n = read_size(blk, "n", 64, 2);
    const std::uint64_t steps = blk.count("steps", 200);
    const std::string obj = blk.choice("objective", "wigner_squared", {"wigner_squared", "identity"});
    const double noise = blk.number("noise", 0.0);
    const double init_scale = blk.number("init_scale", 1.0);
    blk.finish();
    if (!(noise >= 0.0)) throw ConfigError("divergence.noise must be >= 0");
    auto objective = std::make_shared<QuadraticObjective<double>>(
        obj == "identity"
            ? QuadraticObjective<double>::dense(Eigen::MatrixXd::Identity(n, n), Eigen::VectorXd::Zero(n))
            : QuadraticObjective<double>::square_of(sample_wigner(n, ctx.rng.substream(1)).dense(),
                                                    Eigen::VectorXd::Zero(n)));
    SequentialRng gen(ctx.rng.substream(2));
    Eigen::VectorXd theta0(n);
    for (Eigen::Index i = 0; i < n; ++i) theta0[i] = init_scale * gen.normal();
    const GradientModel model(n, QuadraticExact{objective, noise});
    const LossSeries ls = loss_trajectory(*objective, params, model, steps, theta0, ctx.rng.substream(3));
    Table t("divergence_loss", {"step", "loss"});
    for (std::size_t k = 0; k < ls.loss.size(); ++k) t.row() << static_cast<std::uint64_t>(k) << ls.loss[k];
    Table s("divergence_summary", {"objective", "steps", "diverged", "diverged_at", "monotone_increase_from",
                                   "initial_loss", "final_loss"});
    s.row() << obj << steps << ls.diverged << maybe(ls.diverged_at)
            << static_cast<std::uint64_t>(ls.monotone_increase_from()) << ls.loss.front() << ls.loss.back();
    return {render(t, ctx.format), render(s, ctx.format)};
  }

  const auto diag = blk.numbers("diagonal", {1.0, 2.0, 5.0});
  const double sigma = blk.number("sigma", 1.0);
  const std::uint64_t samples = blk.count("samples", 10000);
  blk.finish();
  const Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(diag.data(), static_cast<Eigen::Index>(diag.size()));
  const ProxyReport rep = hessian_proxy_check(d, sigma, samples, params, ctx.rng.substream(4));
  Table t("divergence_proxy", {"index", "diagonal", "ratio", "adam_ratio"});
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d[i] == 0.0) continue;
    t.row() << static_cast<std::int64_t>(i) << d[i] << rep.ratios[k] << rep.adam_ratios[k];
    ++k;
  }
  Table s("divergence_proxy_summary", {"max_deviation", "excluded"});
  s.row() << rep.max_deviation << static_cast<std::uint64_t>(rep.excluded.size());
  return {render(t, ctx.format), render(s, ctx.format)};
}

namespace {

Mitigation::Kind mitigation_kind(const std::string& s) {
  if (s == "zero_guard") return Mitigation::Kind::ZeroGuard;
  if (s == "reinit_state") return Mitigation::Kind::ReinitState;
  if (s == "retune_epsilon") return Mitigation::Kind::RetuneEpsilon;
  if (s == "reduce_betas") return Mitigation::Kind::ReduceBetas;
  return Mitigation::Kind::None;
}

MonitorConfig read_monitor(ConfigMap& root) {
  ConfigMap m = root.map("monitor");
  MonitorConfig c;
  c.dip_threshold_p = m.number("dip_threshold_p", c.dip_threshold_p);
  c.vanish_window = read_int(m, "vanish_window", static_cast<std::uint64_t>(c.vanish_window), 1);
  c.vanish_factor = m.number("vanish_factor", c.vanish_factor);
  c.bimodal_window = read_int(m, "bimodal_window", static_cast<std::uint64_t>(c.bimodal_window), 1);
  c.check_period = read_int(m, "check_period", static_cast<std::uint64_t>(c.check_period), 1);
  c.warmup_steps = m.count("warmup_steps", c.warmup_steps);
  c.n_boot = m.count("n_boot", c.n_boot);
  c.groups = m.texts("groups", {});
  ConfigMap mit = m.map("mitigation");
  const std::string kind = mit.choice("kind", "none",
                                      {"none", "zero_guard", "reinit_state", "retune_epsilon", "reduce_betas"});
  c.mitigation.kind = mitigation_kind(kind);
  if (kind == "retune_epsilon") c.mitigation.new_epsilon = mit.number("new_epsilon", 1e-12);
  if (kind == "reduce_betas") {
    c.mitigation.beta1 = mit.number("beta1", 0.5);
    c.mitigation.beta2 = mit.number("beta2", 0.5);
  }
  mit.finish();
  m.finish();
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("monitor: " + std::string(e.what()));
  }
  return c;
}

Json alarm_json(const AlarmEvent& a) {
  Json j;
  j["step"] = a.step;
  j["group"] = a.group;
  j["kind"] = to_string(a.kind);
  j["dip"] = to_json(maybe(a.dip));
  j["dip_p"] = to_json(maybe(a.dip_p));
  j["grad_inf_norm"] = to_json(Cell(a.grad_inf_norm));
  j["grad_l2_norm"] = to_json(Cell(a.grad_l2_norm));
  j["vanish_run"] = a.vanish_run;
  return j;
}

}  // namespace

std::vector<Artifact> run_spike(RunContext& ctx, bool with_monitor) {
  ConfigMap blk = ctx.root.map("spike");
  const std::string preset = blk.choice("scenario", "standard", {"standard", "healthy"});
  SpikeScenario sc = preset == "healthy" ? SpikeScenario::healthy() : SpikeScenario::standard();
  sc.n_g = read_size(blk, "n_g", static_cast<std::uint64_t>(sc.n_g), 100);
  sc.n_r = read_size(blk, "n_r", static_cast<std::uint64_t>(sc.n_r), 100);
  sc.steps = blk.count("steps", sc.steps);
  sc.r_noise = blk.number("r_noise", sc.r_noise);
  sc.g_scale = read_schedule(blk, "g_scale", sc.g_scale);
  sc.g_noise = read_schedule(blk, "g_noise", sc.g_noise);
  {
    ConfigMap ev = blk.map("rare_event");
    sc.rare_event.enabled = ev.flag("enabled", sc.rare_event.enabled);
    sc.rare_event.step = ev.count("step", sc.rare_event.step);
    sc.rare_event.multiplier = ev.number("multiplier", sc.rare_event.multiplier);
    ev.finish();
  }
  {
    ConfigMap st = blk.map("stage");
    sc.stage.vanish_factor = st.number("vanish_factor", sc.stage.vanish_factor);
    sc.stage.correlation_cosine = st.number("correlation_cosine", sc.stage.correlation_cosine);
    sc.stage.loss_rise_factor = st.number("loss_rise_factor", sc.stage.loss_rise_factor);
    sc.stage.decay_ratio = st.number("decay_ratio", sc.stage.decay_ratio);
    sc.stage.window = st.count("window", sc.stage.window);
    st.finish();
  }
  sc.histogram_steps = blk.counts("histogram_steps", {});
  sc.histogram_bins = blk.count("histogram_bins", sc.histogram_bins);
  sc.histogram_range = blk.number("histogram_range", sc.histogram_range);
  sc.snapshot_step = blk.optional_count("snapshot_step");
  blk.finish();
  sc.params = read_optimizer(ctx.root, sc.params);
  sc.modality = read_modality(ctx.root, sc.modality);
  if (with_monitor || ctx.root.has("monitor")) sc.monitor = read_monitor(ctx.root);
  try {
    sc.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("spike: " + std::string(e.what()));
  }

  const SpikeTimeline tl = run_spike_scenario(sc, ctx.rng.substream(1));
  std::vector<Artifact> out;

  Table t("spike_timeline", {"step", "loss", "g_l2_G", "g_inf_G", "g_l2_R", "g_inf_R", "u_G_class", "u_G_dip",
                             "u_G_zero_mass", "r_G_class", "r_G_dip", "r_G_dip_p", "cosine", "epsilon", "stage"});
  for (const auto& r : tl.records)
    t.row() << r.step << r.loss << r.g_l2_g << r.g_inf_g << r.g_l2_r << r.g_inf_r << to_string(r.u_g.cls)
            << r.u_g.dip.dip << r.u_g.zero_mass_fraction << to_string(r.r_g.cls) << r.r_g.dip.dip
            << maybe(r.r_g.dip.p_value) << r.cosine << r.epsilon << to_string(r.stage);
  out.push_back(render(t, ctx.format));

  Table s("spike_summary", {"reference_step", "event_fired", "diverged", "diverged_at", "vanish_step",
                            "explosion_step", "loss_spike_step", "recovery_step", "r_bimodal_before_event",
                            "baseline_loss", "peak_loss", "post_event_distance", "first_impending_spike"});
  s.row() << tl.reference_step << tl.event_fired << tl.diverged << maybe(tl.diverged_at) << maybe(tl.vanish_step)
          << maybe(tl.explosion_step) << maybe(tl.loss_spike_step) << maybe(tl.recovery_step)
          << tl.r_bimodal_before_event << tl.baseline_loss << tl.peak_loss << tl.post_event_distance
          << maybe(tl.first_alarm(AlarmKind::ImpendingSpike));
  out.push_back(render(s, ctx.format));

  if (!tl.histograms.empty()) {
    Table h("spike_histograms", {"step", "quantity", "bin_lo", "bin_hi", "count"});
    for (const auto& sh : tl.histograms) {
      histogram_rows(h, {sh.step, std::string("u_G")}, sh.u_g);
      histogram_rows(h, {sh.step, std::string("r_G")}, sh.r_g);
    }
    out.push_back(render(h, ctx.format));
  }

  if (sc.monitor) {
    if (ctx.format == Format::Json) {
      std::vector<Json> lines;
      for (const auto& a : tl.alarms) lines.push_back(alarm_json(a));
      out.push_back(json_lines("alarms.jsonl", lines));
    } else {
      Table a("alarms", {"step", "group", "kind", "dip", "dip_p", "grad_inf_norm", "grad_l2_norm", "vanish_run"});
      for (const auto& e : tl.alarms)
        a.row() << e.step << e.group << to_string(e.kind) << maybe(e.dip) << maybe(e.dip_p) << e.grad_inf_norm
                << e.grad_l2_norm << static_cast<std::int64_t>(e.vanish_run);
      out.push_back(render(a, ctx.format));
    }
    Table m("mitigations", {"step", "group", "kind", "applied", "note"});
    for (const auto& r : tl.mitigations) m.row() << r.step << r.group << to_string(r.kind) << r.applied << r.note;
    out.push_back(render(m, ctx.format));
  }

  if (tl.snapshot) {
    std::ostringstream os;
    write_snapshot(os, *tl.snapshot);
    out.push_back({"snapshot.adsn", os.str()});
  }
  return out;
}

std::vector<Artifact> run_analyze(RunContext& ctx, const std::string& snapshot_path) {
  ConfigMap blk = ctx.root.map("analyze");
  const double eps = blk.number("epsilon", 1e-8);
  blk.finish();
  if (!(eps >= 0.0)) throw ConfigError("analyze.epsilon must be >= 0");
  const ModalityThresholds th = read_modality(ctx.root);

  const OptimizerSnapshot snap = load_snapshot(snapshot_path);
  const auto groups = analyze_snapshot(snap, th, ctx.rng.substream(1), eps);

  std::vector<std::string> cols = {"group", "size", "g_l2", "g_inf", "m_l2", "m_inf", "v_l2", "v_inf",
                                   "u_mean", "u_variance"};
  for (const auto& c : kModalityColumns) cols.push_back("u_" + c);
  cols.insert(cols.end(), {"r_mean", "r_variance"});
  for (const auto& c : kModalityColumns) cols.push_back("r_" + c);
  cols.insert(cols.end(), {"vanishing", "flagged"});
  Table t("snapshot_groups", cols);
  for (const auto& a : groups) {
    t.row() << a.group << static_cast<std::int64_t>(a.size) << a.grad_l2_norm << a.grad_inf_norm << a.m_l2_norm
            << a.m_inf_norm << a.v_l2_norm << a.v_inf_norm << a.update.mean << a.update.variance;
    if (a.update_modality) modality_cells(t, *a.update_modality);
    else empty_modality_cells(t);
    t << a.ratio.mean << a.ratio.variance;
    if (a.ratio_modality) modality_cells(t, *a.ratio_modality);
    else empty_modality_cells(t);
    t << a.vanishing << a.flagged;
  }
  return {render(t, ctx.format)};
}

}  // namespace adamlab::cli
