#include "adamlab/gradients.hpp"
#include "adamlab/monitor.hpp"

#include <doctest.h>

#include <cstring>

using namespace adamlab;

namespace {

AdamParams textbook() {
  AdamParams p;
  p.recursion = Recursion::Textbook;
  return p;
}

std::vector<AlarmEvent> monitor_run(const GradientModel& model, std::uint64_t steps, MonitorConfig cfg = {}) {
  const AdamParams p = textbook();
  AdamState<double> state(model.size());
  MonitorState ms;
  std::vector<AlarmEvent> all;
  const CounterRng rng(1), null(2);
  for (std::uint64_t t = 1; t <= steps; ++t) {
    const Eigen::VectorXd g = sample(model, t, rng);
    advance(state, g, p);
    const StepSnapshot snap{t, &g, &state, &model.partition(), p.epsilon};
    for (auto& a : observe(ms, cfg, snap, null)) all.push_back(a);
  }
  return all;
}

GradientModel scaled(double scale, LeafModel leaf, Eigen::Index n = 400) {
  const auto part = GroupPartition::single(n, "G");
  return GradientModel(n, Layered{part, {{"G", leaf, ScaleSchedule::constant(scale), ScaleSchedule::constant(1.0)}}});
}

bool bits_equal(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

}  // namespace

TEST_SUITE("monitor") {
  TEST_CASE("healthy sign gradients raise nothing") {
    CHECK(monitor_run(GradientModel(1000, IidSign{}), 500).empty());
  }

  TEST_CASE("vanishing gradients with a unimodal ratio") {
    const auto alarms = monitor_run(scaled(1e-10, IidSign{}), 120);
    REQUIRE(alarms.size() == 1);
    CHECK(alarms[0].kind == AlarmKind::VanishingGradients);
    CHECK(alarms[0].step == 20 + 19);
    CHECK(alarms[0].vanish_run == 20);
    CHECK(alarms[0].group == "G");
  }

  TEST_CASE("vanishing plus bimodal ratio is an impending spike") {
    const auto alarms = monitor_run(scaled(1e-10, CorrelatedSign{10.0}), 120);
    int impending = 0;
    for (const auto& a : alarms) impending += a.kind == AlarmKind::ImpendingSpike;
    CHECK(impending == 1);
    CHECK(alarms.back().kind == AlarmKind::ImpendingSpike);
    CHECK(*alarms.back().dip_p < 0.01);
  }

  TEST_CASE("observations are deterministic") {
    const auto model = scaled(1e-10, CorrelatedSign{10.0});
    const auto a = monitor_run(model, 80), b = monitor_run(model, 80);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].step == b[i].step);
      CHECK(a[i].kind == b[i].kind);
      CHECK(*a[i].dip == *b[i].dip);
    }
  }

  TEST_CASE("snapshot consistency is enforced") {
    AdamState<double> state(10);
    Eigen::VectorXd g = Eigen::VectorXd::Ones(10);
    const auto big = GroupPartition::single(12);
    MonitorState ms;
    const MonitorConfig cfg;
    CHECK_THROWS_AS(observe(ms, cfg, StepSnapshot{1, &g, &state, &big, 1e-8}, CounterRng(1)), std::invalid_argument);
    const auto ok = GroupPartition::single(10);
    Eigen::VectorXd g9 = Eigen::VectorXd::Ones(9);
    CHECK_THROWS_AS(observe(ms, cfg, StepSnapshot{1, &g9, &state, &ok, 1e-8}, CounterRng(1)), std::invalid_argument);
    observe(ms, cfg, StepSnapshot{5, &g, &state, &ok, 1e-8}, CounterRng(1));
    CHECK_THROWS_AS(observe(ms, cfg, StepSnapshot{5, &g, &state, &ok, 1e-8}, CounterRng(1)), std::invalid_argument);
    MonitorConfig bad;
    bad.check_period = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  }

  TEST_CASE("group reinitialisation is local") {
    const auto part = GroupPartition::contiguous({{"G", 5}, {"R", 7}});
    AdamState<double> state(12);
    AdamParams p = textbook();
    for (int t = 1; t <= 10; ++t) advance(state, Eigen::VectorXd(Eigen::VectorXd::LinSpaced(12, 1, 12)), p);
    const AdamState<double> before = state;
    const AdamParams p_before = p;
    AlarmEvent trig;
    trig.kind = AlarmKind::ImpendingSpike;
    trig.group = "G";
    const auto rec = apply_mitigation(p, state, part, {Mitigation::Kind::ReinitState}, trig);
    CHECK(rec.applied);
    CHECK(state.m.head(5).isZero(0));
    CHECK(state.v.head(5).isZero(0));
    CHECK(bits_equal(state.m.tail(7), before.m.tail(7)));
    CHECK(bits_equal(state.v.tail(7), before.v.tail(7)));
    CHECK(state.clock[4] == 0);
    CHECK(state.clock[5] == 10);
    CHECK(p.epsilon == p_before.epsilon);
  }

  TEST_CASE("mitigation variants") {
    const auto part = GroupPartition::single(3, "G");
    AdamState<double> state(3);
    AlarmEvent trig;
    trig.kind = AlarmKind::ImpendingSpike;
    trig.group = "G";

    AdamParams p = textbook();
    auto rec = apply_mitigation(p, state, part, {Mitigation::Kind::ZeroGuard}, trig);
    CHECK(rec.applied);
    CHECK(p.policy == EpsilonPolicy::ZeroGuard);
    CHECK(p.epsilon == 0.0);
    rec = apply_mitigation(p, state, part, {Mitigation::Kind::ZeroGuard}, trig);
    CHECK_FALSE(rec.applied);
    CHECK(rec.note.rfind("warning", 0) == 0);

    p = textbook();
    rec = apply_mitigation(p, state, part, {Mitigation::Kind::RetuneEpsilon, 1e-6}, trig);
    CHECK_FALSE(rec.applied);
    CHECK(p.epsilon == 1e-8);
    rec = apply_mitigation(p, state, part, {Mitigation::Kind::RetuneEpsilon, 1e-12}, trig);
    CHECK(rec.applied);
    CHECK(p.epsilon == 1e-12);

    rec = apply_mitigation(p, state, part, {Mitigation::Kind::ReduceBetas, 0.0, 0.95, 0.99}, trig);
    CHECK_FALSE(rec.applied);
    rec = apply_mitigation(p, state, part, {Mitigation::Kind::ReduceBetas, 0.0, 0.8, 0.9}, trig);
    CHECK(rec.applied);
    CHECK(p.beta1 == 0.8);

    trig.kind = AlarmKind::BimodalRatio;
    CHECK_THROWS_AS(apply_mitigation(p, state, part, {Mitigation::Kind::ReinitState}, trig), std::invalid_argument);
    CHECK(mitigation_from_string(to_string(Mitigation::Kind::RetuneEpsilon)) == Mitigation::Kind::RetuneEpsilon);
  }
}
