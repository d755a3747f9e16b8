#include "adamlab/spike_sim.hpp"

#include "adamlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace adamlab {

namespace {

// Null distributions for the dip test are a fixed reference, shared by every
// run so the cache is hit across seeds.
const CounterRng& null_rng() {
  static const CounterRng rng(0x5EEDD1Full);
  return rng;
}

struct Problem {
  Eigen::VectorXd a, c, y, theta_star;
};

Problem draw_problem(const SpikeScenario& sc, const CounterRng& rng) {
  const auto& o = sc.objective;
  Problem p;
  p.a.resize(sc.n_r);
  p.c.resize(sc.n_r);
  p.theta_star.resize(sc.n_r);
  for (Eigen::Index j = 0; j < sc.n_r; ++j) {
    const auto uj = static_cast<std::uint64_t>(j);
    p.a[j] = o.feature_base + o.feature_jitter * rng.normal(uj, 0);
    p.c[j] = o.coupling * rng.normal(uj, 1);
    p.theta_star[j] = o.target_scale * rng.normal(uj, 2);
  }
  p.y = p.a.cwiseProduct(p.theta_star);
  return p;
}

double cosine(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y) {
  const double nx = x.norm(), ny = y.norm();
  return nx > 0.0 && ny > 0.0 ? x.dot(y) / (nx * ny) : 0.0;
}

}  // namespace

SpikeScenario SpikeScenario::standard() {
  SpikeScenario sc;
  sc.params.recursion = Recursion::Textbook;
  sc.params.eta = constant_step(1e-3);
  return sc;
}

SpikeScenario SpikeScenario::healthy() {
  SpikeScenario sc = standard();
  sc.g_scale = ScaleSchedule::constant(sc.g_scale.from);
  sc.g_noise = ScaleSchedule::constant(10.0);
  sc.rare_event.enabled = false;
  return sc;
}

GroupPartition SpikeScenario::partition() const {
  return GroupPartition::contiguous({{"G", n_g}, {"R", n_r}});
}

void SpikeScenario::validate() const {
  if (n_g < 100) throw std::invalid_argument("spike scenario needs n_g >= 100");
  if (n_r < n_g) throw std::invalid_argument("spike scenario needs n_r >= n_g");
  if (steps < 1) throw std::invalid_argument("spike scenario needs steps >= 1");
  if (!(r_noise >= 0.0)) throw std::invalid_argument("r_noise must be non-negative");
  if (!(rare_event.multiplier > 0.0)) throw std::invalid_argument("rare-event multiplier must be positive");
  if (stage.window < 10) throw std::invalid_argument("stage window must be >= 10");
  if (!(histogram_range > 0.0) || histogram_bins < 1)
    throw std::invalid_argument("bad histogram settings");
  g_scale.validate();
  g_noise.validate();
  params.validate();
  if (monitor) monitor->validate();
}

std::string to_string(Stage s) {
  switch (s) {
    case Stage::Undetermined: return "Undetermined";
    case Stage::Healthy: return "Healthy";
    case Stage::Vanishing: return "Vanishing";
    case Stage::SpikedUpdate: return "SpikedUpdate";
    case Stage::CorrelatedVanishing: return "CorrelatedVanishing";
    case Stage::BimodalRatio: return "BimodalRatio";
    case Stage::RareEvent: return "RareEvent";
    case Stage::Divergence: return "Divergence";
    case Stage::Decorrelated: return "Decorrelated";
    case Stage::Recovery: return "Recovery";
  }
  return "Undetermined";
}

Stage classify_stage(const StepRecord& rec, std::span<const StepRecord> window,
                     const StageThresholds& th) {
  if (window.size() < 10) throw std::invalid_argument("stage classification needs a window of >= 10 steps");
  double base = std::numeric_limits<double>::infinity();
  double g_max = 0.0;
  bool pre_vanished = false;
  for (const auto& w : window) {
    base = std::min(base, w.loss);
    g_max = std::max(g_max, w.g_inf_g);
    pre_vanished = pre_vanished || w.g_inf_g < w.epsilon * th.vanish_factor;
  }
  // A rise inside the window: some loss above rise * an earlier loss.
  bool window_rose = false;
  double running_min = std::numeric_limits<double>::infinity();
  for (const auto& w : window) {
    window_rose = window_rose || w.loss > th.loss_rise_factor * running_min;
    running_min = std::min(running_min, w.loss);
  }

  const bool elevated = rec.loss > th.loss_rise_factor * base;
  const bool vanished = rec.g_inf_g < rec.epsilon * th.vanish_factor;
  const Modality u = rec.u_g.cls, r = rec.r_g.cls;

  if (elevated) return u == Modality::Bimodal ? Stage::Divergence : Stage::Decorrelated;
  if (window_rose) return Stage::Recovery;
  if (vanished) {
    if (u != Modality::SpikedAtZero) return Stage::Vanishing;
    if (r == Modality::Bimodal) return Stage::BimodalRatio;
    if (rec.cosine > th.correlation_cosine) return Stage::CorrelatedVanishing;
    return Stage::SpikedUpdate;
  }
  if (pre_vanished) return Stage::RareEvent;
  if (rec.g_inf_g < th.decay_ratio * g_max) return Stage::Vanishing;
  if (u == Modality::Unimodal && r == Modality::Unimodal) return Stage::Healthy;
  return Stage::Undetermined;
}

std::optional<std::uint64_t> SpikeTimeline::first_alarm(AlarmKind kind) const {
  for (const auto& a : alarms)
    if (a.kind == kind) return a.step;
  return std::nullopt;
}

SpikeTimeline run_spike_scenario(const SpikeScenario& sc, const CounterRng& rng) {
  sc.validate();
  const GroupPartition part = sc.partition();
  const Group& gg = part[0];
  const Group& gr = part[1];
  const Eigen::Index n = sc.n_g + sc.n_r;

  const Problem prob = draw_problem(sc, rng.substream(1));
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(n);
  {
    const CounterRng init = rng.substream(3);
    for (Eigen::Index j = 0; j < sc.n_r; ++j)
      theta[sc.n_g + j] = prob.theta_star[j] + sc.objective.init_noise * init.normal(static_cast<std::uint64_t>(j), 0);
  }

  std::vector<RareEvent> events;
  if (sc.rare_event.enabled) events.push_back({sc.rare_event.step, "G", sc.rare_event.multiplier});
  const GradientModel model(
      n,
      Layered{part,
              {Layer{"G", CorrelatedSign{1.0}, sc.g_scale, sc.g_noise},
               Layer{"R", IidGaussian{sc.r_noise}, ScaleSchedule::constant(1.0 / static_cast<double>(sc.n_r)),
                     ScaleSchedule::constant(1.0)}}},
      1, events);
  const CounterRng grad_rng = rng.substream(2);

  AdamParams params = sc.params;
  AdamState<double> state(n);
  MonitorState mstate;
  const double ref_eps = sc.params.epsilon > 0.0 ? sc.params.epsilon : 1e-8;
  const double inv_nr = 1.0 / static_cast<double>(sc.n_r);

  SpikeTimeline tl;
  tl.reference_step = sc.rare_event.step;
  tl.records.reserve(sc.steps);

  Eigen::VectorXd g(n), s(sc.n_r), res(sc.n_r), prev_gg = Eigen::VectorXd::Zero(sc.n_g);
  for (std::uint64_t t = 1; t <= sc.steps; ++t) {
    auto th_g = segment(theta, gg);
    auto th_r = segment(theta, gr);
    for (Eigen::Index j = 0; j < sc.n_r; ++j) s[j] = prob.a[j] + prob.c[j] * th_g[j % sc.n_g];
    res = s.cwiseProduct(th_r) - prob.y;
    const double loss = 0.5 * inv_nr * res.squaredNorm();
    if (!std::isfinite(loss)) {
      tl.diverged = true;
      tl.diverged_at = t;
      break;
    }

    sample_into(model, t, grad_rng, g);
    const double factor = model.group_factor(0, t);
    if (sc.rare_event.enabled && t == sc.rare_event.step) tl.event_fired = true;
    for (Eigen::Index j = 0; j < sc.n_r; ++j) {
      g[gr.start + j] += inv_nr * res[j] * s[j];
      g[gg.start + j % sc.n_g] += factor * inv_nr * res[j] * prob.c[j] * th_r[j];
    }
    if (!g.allFinite()) {
      tl.diverged = true;
      tl.diverged_at = t;
      break;
    }

    const auto upd = advance(state, g, params);
    const Eigen::VectorXd r = ratio(state.m, state.v);

    StepRecord rec;
    rec.step = t;
    rec.loss = loss;
    rec.epsilon = ref_eps;
    const auto g_g = segment(g, gg);
    const auto g_r = segment(g, gr);
    rec.g_l2_g = g_g.norm();
    rec.g_inf_g = g_g.cwiseAbs().maxCoeff();
    rec.g_l2_r = g_r.norm();
    rec.g_inf_r = g_r.cwiseAbs().maxCoeff();
    const Eigen::VectorXd u_g = segment(upd.u, gg);
    const Eigen::VectorXd r_g = segment(r, gg);
    rec.u_g = classify_modality(u_g, sc.modality, null_rng());
    rec.r_g = classify_modality(r_g, sc.modality, null_rng());
    rec.cosine = cosine(g_g, prev_gg);
    prev_gg = g_g;

    const std::size_t have = tl.records.size();
    if (have >= 10) {
      const std::size_t w = std::min(have, sc.stage.window);
      rec.stage = classify_stage(rec, std::span<const StepRecord>(tl.records).subspan(have - w, w), sc.stage);
    }

    if (t >= tl.reference_step && t <= tl.reference_step + 10)
      tl.post_event_distance = std::min(tl.post_event_distance, histogram_distance(u_g, r_g, sc.histogram_bins));
    if (std::find(sc.histogram_steps.begin(), sc.histogram_steps.end(), t) != sc.histogram_steps.end())
      tl.histograms.push_back({t, histogram(u_g, sc.histogram_bins, -sc.histogram_range, sc.histogram_range),
                               histogram(r_g, sc.histogram_bins, -sc.histogram_range, sc.histogram_range)});

    if (sc.snapshot_step && *sc.snapshot_step == t) tl.snapshot = OptimizerSnapshot::capture(state, g, part);

    if (sc.monitor) {
      const StepSnapshot snap{t, &g, &state, &part, params.epsilon > 0.0 ? params.epsilon : ref_eps};
      for (const auto& alarm : observe(mstate, *sc.monitor, snap, null_rng())) {
        tl.alarms.push_back(alarm);
        if (alarm.kind == AlarmKind::ImpendingSpike && sc.monitor->mitigation.kind != Mitigation::Kind::None)
          tl.mitigations.push_back(apply_mitigation(params, state, part, sc.monitor->mitigation, alarm));
      }
    }

    tl.records.push_back(std::move(rec));
    theta -= params.step_size(t) * upd.u;
  }

  // Event analysis relative to t*.
  const auto& recs = tl.records;
  const double thr = ref_eps * sc.stage.vanish_factor;
  for (const auto& rec : recs) {
    if (!tl.vanish_step && rec.g_inf_g < thr) tl.vanish_step = rec.step;
    if (tl.vanish_step && !tl.explosion_step && rec.step > *tl.vanish_step && rec.g_inf_g >= thr)
      tl.explosion_step = rec.step;
  }
  const std::uint64_t ts = tl.reference_step;
  std::vector<double> before;
  for (const auto& rec : recs) {
    if (rec.step + 50 >= ts && rec.step < ts) before.push_back(rec.loss);
    if (rec.step + 10 >= ts && rec.step < ts && rec.r_g.cls == Modality::Bimodal) tl.r_bimodal_before_event = true;
  }
  if (!before.empty()) {
    tl.baseline_loss = median(before);
    for (const auto& rec : recs) {
      if (rec.step < ts) continue;
      tl.peak_loss = std::max(tl.peak_loss, rec.loss);
      if (!tl.loss_spike_step && rec.loss > sc.stage.loss_rise_factor * tl.baseline_loss) tl.loss_spike_step = rec.step;
      if (tl.loss_spike_step && !tl.recovery_step && rec.step > *tl.loss_spike_step &&
          rec.loss <= 1.1 * tl.baseline_loss)
        tl.recovery_step = rec.step;
    }
  }
  return tl;
}

ChainGain chain_reaction_gain(double epsilon) {
  if (epsilon == 0.0) throw UnsupportedError("the chain-reaction gain is unbounded at epsilon = 0");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  const double h = epsilon / 100.0;
  const auto phi = [epsilon](double x) { return x / (std::abs(x) + epsilon); };
  return {1.0 / epsilon, (phi(h) - phi(0.0)) / h};
}

}  // namespace adamlab
