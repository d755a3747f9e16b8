#include "adamlab/errors.hpp"
#include "adamlab/spike_sim.hpp"

#include <doctest.h>

#include <algorithm>

using namespace adamlab;

namespace {

const SpikeTimeline& standard_run() {
  static const SpikeTimeline tl = [] {
    SpikeScenario sc = SpikeScenario::standard();
    sc.monitor = MonitorConfig{};
    sc.histogram_steps = {200, 300};
    return run_spike_scenario(sc, CounterRng(1));
  }();
  return tl;
}

StepRecord record(double loss, double g_inf, Modality u, Modality r, double cosine = 0.0) {
  StepRecord rec;
  rec.loss = loss;
  rec.g_inf_g = g_inf;
  rec.epsilon = 1e-8;
  rec.u_g.cls = u;
  rec.r_g.cls = r;
  rec.cosine = cosine;
  return rec;
}

}  // namespace

TEST_SUITE("spike_sim") {
  TEST_CASE("default scenario ordering") {
    const auto& tl = standard_run();
    REQUIRE(tl.records.size() == 500);
    CHECK_FALSE(tl.diverged);
    CHECK(tl.event_fired);
    CHECK(tl.r_bimodal_before_event);
    REQUIRE(tl.explosion_step);
    CHECK(*tl.explosion_step == tl.reference_step);
    REQUIRE(tl.loss_spike_step);
    CHECK(*tl.loss_spike_step >= *tl.explosion_step + 1);
    CHECK(*tl.loss_spike_step <= tl.reference_step + 20);
    const auto alarm = tl.first_alarm(AlarmKind::ImpendingSpike);
    REQUIRE(alarm);
    CHECK(*alarm < *tl.loss_spike_step);
    for (const auto& rec : tl.records)
      if (rec.step >= 250 && rec.step < tl.reference_step) CHECK(rec.u_g.cls == Modality::SpikedAtZero);
    CHECK(tl.post_event_distance < 0.1);
    REQUIRE(tl.recovery_step);
    CHECK(*tl.recovery_step <= tl.reference_step + 200);
    REQUIRE(tl.histograms.size() == 2);
    CHECK(tl.histograms[0].u_g.bins() == 101);
  }

  TEST_CASE("timeline records are ordered and labelled") {
    const auto& tl = standard_run();
    std::vector<Stage> seen;
    for (std::size_t i = 0; i < tl.records.size(); ++i) {
      CHECK(tl.records[i].step == i + 1);
      if (i < 10) CHECK(tl.records[i].stage == Stage::Undetermined);
      if (std::find(seen.begin(), seen.end(), tl.records[i].stage) == seen.end()) seen.push_back(tl.records[i].stage);
    }
    for (Stage s : {Stage::Healthy, Stage::Vanishing, Stage::SpikedUpdate, Stage::BimodalRatio, Stage::RareEvent,
                    Stage::Divergence})
      CHECK(std::find(seen.begin(), seen.end(), s) != seen.end());
    CHECK(tl.records[tl.reference_step - 1].stage == Stage::RareEvent);
  }

  TEST_CASE("without the rare event there is no spike") {
    SpikeScenario sc = SpikeScenario::standard();
    sc.rare_event.enabled = false;
    const auto tl = run_spike_scenario(sc, CounterRng(1));
    CHECK_FALSE(tl.event_fired);
    CHECK(tl.peak_loss <= 2.0 * tl.baseline_loss);
    CHECK_FALSE(tl.loss_spike_step);
    for (const auto& rec : tl.records)
      if (rec.step >= 200) CHECK(rec.u_g.cls == Modality::SpikedAtZero);
  }

  TEST_CASE("healthy scenario stays healthy") {
    SpikeScenario sc = SpikeScenario::healthy();
    sc.monitor = MonitorConfig{};
    const auto tl = run_spike_scenario(sc, CounterRng(2));
    CHECK(tl.alarms.empty());
    for (const auto& rec : tl.records) {
      if (rec.step <= 10) continue;
      CHECK(rec.stage == Stage::Healthy);
      CHECK(rec.u_g.cls == Modality::Unimodal);
      CHECK(rec.r_g.cls == Modality::Unimodal);
    }
  }

  TEST_CASE("snapshot capture and scenario validation") {
    SpikeScenario sc = SpikeScenario::healthy();
    sc.steps = 30;
    sc.snapshot_step = 25;
    const auto tl = run_spike_scenario(sc, CounterRng(3));
    REQUIRE(tl.snapshot);
    CHECK(tl.snapshot->size() == sc.n_g + sc.n_r);
    CHECK(tl.snapshot->partition.size() == 2);

    SpikeScenario bad = SpikeScenario::standard();
    bad.n_g = 10;
    CHECK_THROWS_AS(run_spike_scenario(bad, CounterRng(1)), std::invalid_argument);
  }

  TEST_CASE("stage rules") {
    const StageThresholds th;
    std::vector<StepRecord> healthy(12, record(1.0, 1e-3, Modality::Unimodal, Modality::Unimodal));
    CHECK(classify_stage(record(1.0, 1e-3, Modality::Unimodal, Modality::Unimodal), healthy, th) == Stage::Healthy);

    std::vector<StepRecord> quiet(12, record(1.0, 1e-10, Modality::SpikedAtZero, Modality::Unimodal));
    CHECK(classify_stage(record(1.0, 1e-10, Modality::SpikedAtZero, Modality::Bimodal), quiet, th) ==
          Stage::BimodalRatio);
    CHECK(classify_stage(record(1.0, 1e-10, Modality::SpikedAtZero, Modality::Unimodal), quiet, th) ==
          Stage::SpikedUpdate);
    CHECK(classify_stage(record(1.0, 1e-10, Modality::SpikedAtZero, Modality::Unimodal, 0.95), quiet, th) ==
          Stage::CorrelatedVanishing);
    CHECK(classify_stage(record(1.0, 1e-10, Modality::Unimodal, Modality::Unimodal), quiet, th) == Stage::Vanishing);

    // Gradient explosion with the loss not yet risen.
    CHECK(classify_stage(record(1.0, 1e-3, Modality::Bimodal, Modality::Bimodal), quiet, th) == Stage::RareEvent);
    // Loss up with bimodal updates, then without.
    CHECK(classify_stage(record(5.0, 1e-3, Modality::Bimodal, Modality::Bimodal), quiet, th) == Stage::Divergence);
    CHECK(classify_stage(record(5.0, 1e-3, Modality::Unimodal, Modality::Unimodal), quiet, th) ==
          Stage::Decorrelated);

    std::vector<StepRecord> after = healthy;
    after[5].loss = 5.0;
    CHECK(classify_stage(record(1.0, 1e-3, Modality::Unimodal, Modality::Unimodal), after, th) == Stage::Recovery);

    CHECK_THROWS_AS(classify_stage(healthy[0], std::span<const StepRecord>(healthy).first(9), th),
                    std::invalid_argument);
    CHECK(to_string(Stage::BimodalRatio) == "BimodalRatio");
  }

  TEST_CASE("chain reaction gain") {
    CHECK(chain_reaction_gain(1e-8).analytic == doctest::Approx(1e8));
    CHECK(chain_reaction_gain(1.0).analytic == 1.0);
    const auto g = chain_reaction_gain(1e-4);
    CHECK(std::abs(g.finite_difference - 1e4) / 1e4 < 0.01);
    const auto g8 = chain_reaction_gain(1e-8);
    CHECK(std::abs(g8.finite_difference - g8.analytic) / g8.analytic < 0.01);
    CHECK_THROWS_AS(chain_reaction_gain(0.0), UnsupportedError);
    CHECK_THROWS_AS(chain_reaction_gain(-1.0), std::invalid_argument);
  }
}
