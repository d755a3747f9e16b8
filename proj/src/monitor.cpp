#include "adamlab/monitor.hpp"

#include "adamlab/statlab.hpp"

#include <cmath>
#include <stdexcept>

namespace adamlab {

std::string to_string(Mitigation::Kind k) {
  switch (k) {
    case Mitigation::Kind::None: return "None";
    case Mitigation::Kind::ZeroGuard: return "ZeroGuard";
    case Mitigation::Kind::ReinitState: return "ReinitState";
    case Mitigation::Kind::RetuneEpsilon: return "RetuneEpsilon";
    case Mitigation::Kind::ReduceBetas: return "ReduceBetas";
  }
  return "Unknown";
}

Mitigation::Kind mitigation_from_string(const std::string& s) {
  for (auto k : {Mitigation::Kind::None, Mitigation::Kind::ZeroGuard, Mitigation::Kind::ReinitState,
                 Mitigation::Kind::RetuneEpsilon, Mitigation::Kind::ReduceBetas})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown mitigation '" + s + "'");
}

std::string to_string(AlarmKind k) {
  switch (k) {
    case AlarmKind::VanishingGradients: return "VanishingGradients";
    case AlarmKind::BimodalRatio: return "BimodalRatio";
    case AlarmKind::ImpendingSpike: return "ImpendingSpike";
  }
  return "Unknown";
}

void MonitorConfig::validate() const {
  if (!(dip_threshold_p > 0.0 && dip_threshold_p < 1.0))
    throw std::invalid_argument("dip_threshold_p must lie in (0, 1)");
  if (vanish_window < 1) throw std::invalid_argument("vanish_window must be >= 1");
  if (!(vanish_factor > 0.0)) throw std::invalid_argument("vanish_factor must be positive");
  if (bimodal_window < 1) throw std::invalid_argument("bimodal_window must be >= 1");
  if (check_period < 1) throw std::invalid_argument("check_period must be >= 1");
  if (n_boot < 100) throw std::invalid_argument("n_boot must be >= 100");
  if (mitigation.kind == Mitigation::Kind::RetuneEpsilon && !(mitigation.new_epsilon >= 0.0))
    throw std::invalid_argument("RetuneEpsilon needs new_epsilon >= 0");
  if (mitigation.kind == Mitigation::Kind::ReduceBetas &&
      !(mitigation.beta1 > 0.0 && mitigation.beta1 < 1.0 && mitigation.beta2 > 0.0 &&
        mitigation.beta2 < 1.0))
    throw std::invalid_argument("ReduceBetas needs betas in (0, 1)");
}

std::vector<AlarmEvent> observe(MonitorState& ms, const MonitorConfig& cfg,
                                const StepSnapshot& snap, const CounterRng& rng) {
  if (!snap.g || !snap.state || !snap.partition)
    throw std::invalid_argument("incomplete monitor snapshot");
  const auto& part = *snap.partition;
  const auto n = snap.state->size();
  if (snap.g->size() != n) throw std::invalid_argument("gradient and state lengths differ");
  part.validate(n, false);
  for (const auto& label : cfg.groups)
    if (!part.contains(label)) throw std::invalid_argument("monitor watches unknown group '" + label + "'");
  if (ms.tracks.empty()) ms.tracks.resize(part.size());
  if (ms.tracks.size() != part.size())
    throw std::invalid_argument("partition changed between observations");
  if (ms.last_step != 0 && snap.step <= ms.last_step)
    throw std::invalid_argument("monitor steps must increase");
  ms.last_step = snap.step;

  std::vector<AlarmEvent> alarms;
  if (snap.step < cfg.warmup_steps || snap.step % static_cast<std::uint64_t>(cfg.check_period) != 0)
    return alarms;

  const Eigen::VectorXd r = ratio(snap.state->m, snap.state->v);
  for (std::size_t k = 0; k < part.size(); ++k) {
    const Group& grp = part[k];
    if (!cfg.groups.empty() && std::find(cfg.groups.begin(), cfg.groups.end(), grp.label) == cfg.groups.end())
      continue;
    if (grp.length < 4) continue;
    auto& tr = ms.tracks[k];
    const auto g = segment(*snap.g, grp);

    AlarmEvent ev;
    ev.step = snap.step;
    ev.group = grp.label;
    ev.grad_inf_norm = g.cwiseAbs().maxCoeff();
    ev.grad_l2_norm = g.norm();

    tr.vanish_run = ev.grad_inf_norm < snap.epsilon * cfg.vanish_factor ? tr.vanish_run + 1 : 0;
    ev.vanish_run = tr.vanish_run;

    const DipResult dip = dip_test(segment(r, grp), cfg.n_boot, rng);
    ev.dip = dip.dip;
    ev.dip_p = dip.p_value;
    tr.bimodal_run = *dip.p_value < cfg.dip_threshold_p ? tr.bimodal_run + 1 : 0;

    const bool vanishing = tr.vanish_run >= cfg.vanish_window;
    const bool bimodal = tr.bimodal_run >= cfg.bimodal_window;
    const bool impending = vanishing && bimodal;

    auto emit = [&](AlarmKind kind, bool now, bool& before) {
      if (now && !before) {
        ev.kind = kind;
        alarms.push_back(ev);
      }
      before = now;
    };
    emit(AlarmKind::VanishingGradients, vanishing, tr.vanishing);
    emit(AlarmKind::BimodalRatio, bimodal, tr.bimodal);
    emit(AlarmKind::ImpendingSpike, impending, tr.impending);
  }
  return alarms;
}

MitigationRecord apply_mitigation(AdamParams& params, AdamState<double>& state,
                                  const GroupPartition& partition, const Mitigation& mitigation,
                                  const AlarmEvent& trigger) {
  if (trigger.kind != AlarmKind::ImpendingSpike)
    throw std::invalid_argument("mitigations are triggered by ImpendingSpike alarms only");
  MitigationRecord rec{trigger.step, trigger.group, mitigation.kind, false, {}};
  switch (mitigation.kind) {
    case Mitigation::Kind::None:
      rec.note = "no mitigation configured";
      break;
    case Mitigation::Kind::ZeroGuard:
      if (params.policy == EpsilonPolicy::ZeroGuard || params.epsilon == 0.0) {
        rec.note = "warning: epsilon is already 0";
      } else {
        params.epsilon = 0.0;
        params.policy = EpsilonPolicy::ZeroGuard;
        rec.applied = true;
        rec.note = "epsilon set to 0 with the zero guard";
      }
      break;
    case Mitigation::Kind::ReinitState: {
      const Group& g = partition.find(trigger.group);
      reset_group(state, g);
      rec.applied = true;
      rec.note = "m, v and step clock reset for " + std::to_string(g.length) + " parameters";
      break;
    }
    case Mitigation::Kind::RetuneEpsilon:
      if (params.policy == EpsilonPolicy::ZeroGuard) {
        rec.note = "warning: zero guard active, epsilon is fixed at 0";
      } else if (!(mitigation.new_epsilon < params.epsilon)) {
        rec.note = "warning: new epsilon does not lower the current value";
      } else {
        params.epsilon = mitigation.new_epsilon;
        rec.applied = true;
        rec.note = "epsilon lowered";
      }
      break;
    case Mitigation::Kind::ReduceBetas:
      if (!(mitigation.beta1 <= params.beta1 && mitigation.beta2 <= params.beta2) ||
          (mitigation.beta1 == params.beta1 && mitigation.beta2 == params.beta2)) {
        rec.note = "warning: requested betas do not reduce the current values";
      } else {
        params.beta1 = mitigation.beta1;
        params.beta2 = mitigation.beta2;
        rec.applied = true;
        rec.note = "betas reduced";
      }
      break;
  }
  return rec;
}

}  // namespace adamlab
