// Acceptance checks. One line per criterion: "[PASS] n name: details".

#include "adamlab/distribution.hpp"
#include "adamlab/divergence.hpp"
#include "adamlab/io.hpp"
#include "adamlab/optimizer.hpp"
#include "adamlab/rmt.hpp"
#include "adamlab/snapshot.hpp"
#include "adamlab/spike_sim.hpp"
#include "adamlab/statlab.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace adamlab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

AdamParams sim_params(double eps) {
  AdamParams p;
  p.recursion = Recursion::Textbook;
  p.epsilon = eps;
  if (eps == 0.0) p.policy = EpsilonPolicy::ZeroGuard;
  return p;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool bits_equal(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

// Limit of u for a constant gradient under the simulation recursion,
// obtained by running the recursion itself.
double recursion_oracle_constant() {
  AdamState<double> s(1);
  Eigen::VectorXd g = Eigen::VectorXd::Ones(1);
  UpdateVector<double> u;
  for (int t = 0; t < 2000; ++t) u = advance(s, g, sim_params(0.0));
  return u.u[0];
}

Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  const double target = recursion_oracle_constant();
  const double reference = 0.9 / std::sqrt(0.95);
  const GradientModel model(100000, CorrelatedSign{10.0});
  const auto run = run_distribution(model, sim_params(0.0), 300, CounterRng(1));
  const auto rep = classify_modality(run.r, ModalityThresholds{}, CounterRng(101));
  const double secs = seconds_since(t0);
  bool ok = rep.cls == Modality::Bimodal && rep.modes.size() == 2 && secs < 30.0;
  double lo = 0, hi = 0;
  if (rep.modes.size() == 2) {
    lo = rep.modes[0];
    hi = rep.modes[1];
    ok = ok && std::abs(lo + target) <= 0.02 * target && std::abs(hi - target) <= 0.02 * target;
  }
  return {ok, fmt("class %s, modes %.4f / %.4f, target +-%.4f (recursion oracle), reference +-%.4f, %.1f s",
                  to_string(rep.cls).c_str(), lo, hi, target, reference, secs)};
}

Outcome criterion2() {
  const auto t0 = std::chrono::steady_clock::now();
  const GradientModel model(100000, IidSign{});
  const auto run = run_distribution(model, sim_params(1e-8), 300, CounterRng(2));
  const auto rep = classify_modality(run.u, ModalityThresholds{}, CounterRng(102));
  const auto s = summarize(run.u);
  const GradientModel big(1000000, IidSign{});
  const auto oracle = summarize(run_distribution(big, sim_params(1e-8), 300, CounterRng(1002)).u);
  const double secs = seconds_since(t0);
  const double rel = std::abs(s.stddev() - oracle.stddev()) / oracle.stddev();
  const bool ok = rep.cls == Modality::Unimodal && std::abs(s.excess_kurtosis) < 0.2 && rel < 0.05 && secs < 60.0;
  return {ok, fmt("class %s, excess kurtosis %.4f (bound 0.2), std %.5f vs oracle %.5f (%.2f%%), %.1f s",
                  to_string(rep.cls).c_str(), s.excess_kurtosis, s.stddev(), oracle.stddev(), 100 * rel, secs)};
}

Outcome criterion3() {
  int wins = 0;
  double min_gap = 1.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto dip_of = [&](double rho) {
      const auto run = run_distribution(GradientModel(10000, CorrelatedSign{rho}), sim_params(0.0), 300, CounterRng(seed));
      Eigen::VectorXd r = run.r;
      std::sort(r.data(), r.data() + r.size());
      return dip_statistic(r).dip;
    };
    const double hi = dip_of(10.0), lo = dip_of(0.1);
    wins += hi > lo;
    min_gap = std::min(min_gap, hi - lo);
  }
  return {wins == 10, fmt("%d/10 seed pairs with dip(rho=10) > dip(rho=0.1), smallest gap %.4f", wins, min_gap)};
}

Outcome criterion4() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto rep = semicircle_check(512, 50, CounterRng(4));
  const double secs = seconds_since(t0);
  const bool ok = std::abs(rep.second_moment - 0.3125) <= 0.01 && secs < 120.0;
  return {ok, fmt("E[(l/(2 sqrt n)+1/2)^2] = %.4f (target 0.3125 +- 0.01); E[(l/(4 sqrt n)+1/2)^2] = %.4f; "
                  "CDF distance %.4f; %.1f s",
                  rep.second_moment, rep.beta_second_moment, rep.cdf_sup_distance, secs)};
}

Outcome criterion5() {
  const auto rep = squared_spectrum_scaling({64, 128, 256, 512}, 5, CounterRng(5));
  bool levels = true;
  std::string rows;
  for (const auto& row : rep.rows) {
    levels = levels && std::abs(row.mean_eigenvalue - row.target) <= 0.1 * row.target;
    rows += fmt(" n=%ld: %.1f/%.1f", static_cast<long>(row.n), row.mean_eigenvalue, row.target);
  }
  const bool slope_ok = std::abs(rep.slope - 1.0) <= 0.05;
  return {levels && slope_ok,
          fmt("slope %.4f (1 +- 0.05), mean eig(S^2) vs n/4:", rep.slope) + rows};
}

Outcome criterion6() {
  const std::vector<Eigen::Index> ns{64, 128, 256, 512, 1024};
  const auto w = critical_eta_scaling(ns, 20, CounterRng(6), HessianKind::WignerSquared);
  const auto id = critical_eta_scaling(ns, 20, CounterRng(6), HessianKind::Identity);
  int discarded = 0;
  for (const auto& row : w.rows) discarded += row.discarded;
  const bool ok = std::abs(w.slope + 1.0) <= 0.15 && std::abs(id.slope) <= 0.05;
  return {ok, fmt("Wigner-squared slope %.4f (-1 +- 0.15), identity slope %.4f (0 +- 0.05), %d discarded",
                  w.slope, id.slope, discarded)};
}

Outcome criterion7() {
  SequentialRng gen{CounterRng(7)};
  double worst = 0.0;
  int agree = 0, decreasing = 0;
  for (int k = 0; k < 100; ++k) {
    const Eigen::Index n = 4 + k % 29;
    Eigen::MatrixXd s(n, n);
    for (auto& x : s.reshaped()) x = gen.normal();
    const auto sym = SymmetricMatrix<double>::from_lower(s);
    Eigen::VectorXd ts(n), theta(n), u(n);
    for (auto& x : ts) x = gen.normal();
    for (auto& x : theta) x = gen.normal();
    for (auto& x : u) x = gen.normal();
    const auto f = QuadraticObjective<double>::square_of(sym.dense(), ts);
    // Step sizes straddle the instance's own threshold |2 lhs / u^T H u|.
    const Eigen::VectorXd grad = f.gradient(theta);
    const double eta = std::abs(2.0 * grad.dot(u) / f.curvature(u)) * (0.1 + 1.9 * gen.uniform());
    const auto d = descent_condition(grad, u, f, eta);
    const double actual = f.value(theta - eta * u) - f.value(theta);
    const double predicted = -eta * d.lhs + 0.5 * eta * eta * d.curvature;
    const double scale = std::abs(eta * d.lhs) + std::abs(0.5 * eta * eta * d.curvature);
    worst = std::max(worst, std::abs(actual - predicted) / scale);
    agree += (actual < 0.0) == d.satisfied;
    decreasing += actual < 0.0;
  }
  return {worst <= 1e-10 && agree == 100,
          fmt("max relative expansion error %.2e (bound 1e-10), decrease iff satisfied %d/100 (%d decreasing)",
              worst, agree, decreasing)};
}

Outcome criterion8() {
  int ordered = 0, ordered_and_alarmed = 0, false_alarms = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SpikeScenario sc = SpikeScenario::standard();
    sc.monitor = MonitorConfig{};
    const auto tl = run_spike_scenario(sc, CounterRng(seed));
    const bool order = tl.r_bimodal_before_event && tl.explosion_step && *tl.explosion_step == tl.reference_step &&
                       tl.loss_spike_step && *tl.loss_spike_step >= *tl.explosion_step + 1;
    const auto alarm = tl.first_alarm(AlarmKind::ImpendingSpike);
    ordered += order;
    ordered_and_alarmed += order && alarm && tl.loss_spike_step && *alarm < *tl.loss_spike_step;

    SpikeScenario h = SpikeScenario::healthy();
    h.monitor = MonitorConfig{};
    false_alarms += static_cast<bool>(run_spike_scenario(h, CounterRng(seed)).first_alarm(AlarmKind::ImpendingSpike));
  }
  const bool ok = ordered >= 18 && ordered_and_alarmed >= 18 && false_alarms == 0;
  return {ok, fmt("ordering %d/20, ordering with ImpendingSpike before the loss spike %d/20, "
                  "healthy runs with ImpendingSpike %d/20",
                  ordered, ordered_and_alarmed, false_alarms)};
}

Outcome criterion9() {
  int suppressed = 0, halved = 0;
  double worst_ratio = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const SpikeScenario base = SpikeScenario::standard();
    const auto plain = run_spike_scenario(base, CounterRng(seed));

    SpikeScenario none = base;
    none.rare_event.enabled = false;
    const auto quiet = run_spike_scenario(none, CounterRng(seed));
    suppressed += quiet.peak_loss <= 2.0 * quiet.baseline_loss;

    SpikeScenario mit = base;
    mit.monitor = MonitorConfig{};
    mit.monitor->mitigation.kind = Mitigation::Kind::ReinitState;
    const auto fixed = run_spike_scenario(mit, CounterRng(seed));
    const double ratio = fixed.peak_loss / plain.peak_loss;
    worst_ratio = std::max(worst_ratio, ratio);
    halved += ratio < 0.5;
  }
  return {suppressed >= 16 && halved >= 16,
          fmt("no-event peak within 2x baseline %d/20; ReinitState peak < 50%% of unmitigated %d/20 "
              "(largest peak ratio %.3f)",
              suppressed, halved, worst_ratio)};
}

std::string timeline_bytes(const SpikeTimeline& tl) {
  CsvTable t({"step", "loss", "g_inf_g", "dip_u", "dip_r", "stage"});
  for (const auto& r : tl.records)
    t.row().add(r.step).add(r.loss).add(r.g_inf_g).add(r.u_g.dip.dip).add(r.r_g.dip.dip).add(static_cast<int>(r.stage));
  return t.str();
}

Outcome criterion10() {
  std::vector<std::string> failed;

  // Recursion against the closed-form weights.
  double worst = 0.0;
  const AdamParams compounded;
  for (std::uint64_t h = 0; h < 100; ++h) {
    SequentialRng gen(CounterRng(10).substream(h));
    AdamState<double> s(1);
    std::vector<double> g(50);
    for (auto& x : g) {
      x = gen.normal() * std::exp(gen.normal());
      advance(s, Eigen::VectorXd::Constant(1, x), compounded);
    }
    const auto w1 = weight_coefficients(50, compounded.beta1), w2 = weight_coefficients(50, compounded.beta2);
    double m = 0, v = 0, am = 0;
    for (std::size_t k = 0; k < 50; ++k) {
      m += w1[k] * g[k];
      am += std::abs(w1[k] * g[k]);
      v += w2[k] * g[k] * g[k];
    }
    worst = std::max({worst, std::abs(s.m[0] - m) / am, std::abs(s.v[0] - v) / v});
  }
  if (worst > 1e-12) failed.push_back(fmt("recursion %.1e", worst));

  // ZeroGuard invariance under power-of-two scaling.
  {
    SequentialRng gen{CounterRng(11)};
    AdamState<double> a(256), b(256);
    bool same = true;
    for (int t = 0; t < 200; ++t) {
      Eigen::VectorXd g(256);
      for (auto& x : g) x = gen.uniform() < 0.1 ? 0.0 : gen.normal();
      same = same && bits_equal(advance(a, g, sim_params(0.0)).u,
                                advance(b, Eigen::VectorXd(std::ldexp(1.0, -50) * g), sim_params(0.0)).u);
    }
    if (!same) failed.push_back("ZeroGuard invariance");
  }

  // Trace and Frobenius identities.
  double worst_id = 0.0;
  for (std::uint64_t k = 0; k < 5; ++k) {
    const auto w = sample_wigner(128, CounterRng(12).substream(k));
    const auto e = eigenvalues(w).eigenvalues;
    const double fro = w.frobenius_squared();
    worst_id = std::max({worst_id, std::abs(e.sum() - w.trace()) / std::sqrt(fro),
                         std::abs(e.squaredNorm() - fro) / fro});
  }
  if (worst_id > 1e-8) failed.push_back(fmt("Jacobi identities %.1e", worst_id));

  // Snapshot round trip.
  {
    SequentialRng gen{CounterRng(13)};
    OptimizerSnapshot snap;
    snap.partition = GroupPartition::contiguous({{"a", 700}, {"b", 300}});
    snap.m.resize(1000);
    snap.v.resize(1000);
    snap.g.resize(1000);
    for (Eigen::Index i = 0; i < 1000; ++i) {
      snap.m[i] = gen.normal() * std::exp(20 * gen.normal());
      snap.v[i] = std::exp(30 * gen.normal());
      snap.g[i] = gen.normal();
    }
    std::stringstream ss;
    write_snapshot(ss, snap);
    const auto back = read_snapshot(ss);
    if (!bits_equal(back.m, snap.m) || !bits_equal(back.v, snap.v) || !bits_equal(back.g, snap.g))
      failed.push_back("snapshot round trip");
  }

  // Fixed-seed determinism.
  {
    SpikeScenario sc = SpikeScenario::standard();
    sc.steps = 320;
    sc.monitor = MonitorConfig{};
    const std::string a = timeline_bytes(run_spike_scenario(sc, CounterRng(14)));
    const std::string b = timeline_bytes(run_spike_scenario(sc, CounterRng(14)));
    const auto r1 = run_distribution(GradientModel(5000, CorrelatedSign{1.0}), sim_params(1e-8), 100, CounterRng(15));
    const auto r2 = run_distribution(GradientModel(5000, CorrelatedSign{1.0}), sim_params(1e-8), 100, CounterRng(15));
    if (a != b || !bits_equal(r1.u, r2.u)) failed.push_back("determinism");
  }

  std::string detail = fmt("recursion error %.1e, Jacobi identity error %.1e", worst, worst_id);
  detail += failed.empty() ? ", ZeroGuard invariance, snapshot round trip and determinism exact"
                           : ", failed:";
  for (const auto& f : failed) detail += " " + f;
  return {failed.empty(), detail};
}

struct Criterion {
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::vector<int> only;
  app.add_option("-c,--criterion", only, "Run only these criteria (1-10)")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> all{
      {"bimodal mode locations", criterion1},   {"healthy-regime gaussianity", criterion2},
      {"regime monotonicity", criterion3},      {"semicircle second moment", criterion4},
      {"eigenvalue scaling", criterion5},       {"critical learning-rate scaling", criterion6},
      {"descent-condition exactness", criterion7}, {"spike pipeline ordering", criterion8},
      {"suppression and mitigation", criterion9}, {"core numerics", criterion10},
  };

  bool ok = true;
  for (std::size_t k = 0; k < all.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome out;
    try {
      out = all[k].run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] %d %s: %s\n", out.pass ? "PASS" : "FAIL", id, all[k].name, out.detail.c_str());
    std::fflush(stdout);
    ok = ok && out.pass;
  }
  return ok ? 0 : 1;
}
