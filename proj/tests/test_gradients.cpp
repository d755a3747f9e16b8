#include "adamlab/errors.hpp"
#include "adamlab/gradients.hpp"

#include <doctest.h>

#include <cmath>
#include <memory>

using namespace adamlab;

namespace {

struct PooledMoments {
  double mean = 0, variance = 0, lag1 = 0, lag5 = 0;
};

// Moments over coordinates and steps 1..steps.
PooledMoments pooled(const GradientModel& model, int steps, const CounterRng& rng) {
  const Eigen::Index n = model.size();
  std::vector<Eigen::VectorXd> draws;
  for (int t = 1; t <= steps; ++t) draws.push_back(sample(model, static_cast<std::uint64_t>(t), rng));
  PooledMoments pm;
  double count = 0;
  for (const auto& d : draws) {
    pm.mean += d.sum();
    count += static_cast<double>(n);
  }
  pm.mean /= count;
  for (const auto& d : draws) pm.variance += (d.array() - pm.mean).square().sum();
  pm.variance /= count;
  auto lag = [&](int k) {
    double s = 0, c = 0;
    for (int t = 0; t + k < steps; ++t) {
      s += ((draws[t].array() - pm.mean) * (draws[t + k].array() - pm.mean)).sum();
      c += static_cast<double>(n);
    }
    return s / c / pm.variance;
  };
  pm.lag1 = lag(1);
  pm.lag5 = lag(5);
  return pm;
}

}  // namespace

TEST_SUITE("gradients") {
  TEST_CASE("CorrelatedSign with rho = 0 is fresh signs") {
    const GradientModel m(100000, CorrelatedSign{0.0});
    const auto pm = pooled(m, 1, CounterRng(1));
    CHECK(std::abs(pm.mean) < 3.0 / std::sqrt(1e5));
    CHECK(pm.variance == doctest::Approx(1.0).epsilon(0.01));
  }

  TEST_CASE("CorrelatedSign(2) variance and autocorrelation") {
    const GradientModel m(100000, CorrelatedSign{2.0});
    const auto pm = pooled(m, 8, CounterRng(2));
    CHECK(pm.variance == doctest::Approx(5.0).epsilon(0.01));
    CHECK(pm.lag1 == doctest::Approx(0.8).epsilon(0.01));
    CHECK(pm.lag5 == doctest::Approx(0.8).epsilon(0.01));
    const auto spec = expected_moments(m);
    CHECK(spec.mean == 0.0);
    CHECK(spec.variance == doctest::Approx(5.0));
    CHECK(spec.time_autocorrelation == doctest::Approx(0.8));
  }

  TEST_CASE("Gaussian leaves") {
    const GradientModel m(50000, CorrelatedGaussian{1.5, 0.5});
    const auto pm = pooled(m, 6, CounterRng(3));
    const auto spec = expected_moments(m);
    CHECK(spec.variance == doctest::Approx(2.5));
    CHECK(pm.variance == doctest::Approx(2.5).epsilon(0.03));
    CHECK(pm.lag1 == doctest::Approx(spec.time_autocorrelation).epsilon(0.03));
  }

  TEST_CASE("expected moments of simple leaves") {
    auto s = expected_moments(GradientModel(10, IidSign{}));
    CHECK(s.mean == 0.0);
    CHECK(s.variance == 1.0);
    CHECK(s.time_autocorrelation == 0.0);
    CHECK(expected_moments(GradientModel(10, IidSign{}, 100)).variance == doctest::Approx(0.01));
    auto c = expected_moments(GradientModel(10, Constant{3.0}));
    CHECK(c.mean == 3.0);
    CHECK(c.variance == 0.0);
    const auto obj = std::make_shared<QuadraticObjective<double>>(
        QuadraticObjective<double>::dense(Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2)));
    CHECK_THROWS_AS(expected_moments(GradientModel(2, QuadraticExact{obj})), UnsupportedError);
  }

  TEST_CASE("batch averaging divides the variance by k") {
    const CounterRng rng(4);
    const double base = pooled(GradientModel(20000, IidSign{}, 1), 2, rng).variance;
    for (int k : {4, 16, 64}) {
      const double vk = pooled(GradientModel(20000, IidSign{}, k), 2, rng).variance;
      CHECK(vk / base == doctest::Approx(1.0 / k).epsilon(0.1));
    }
  }

  TEST_CASE("draws are order independent and seed dependent") {
    const GradientModel m(1000, CorrelatedSign{1.0});
    const CounterRng rng(9);
    const Eigen::VectorXd a = sample(m, 5, rng);
    sample(m, 1, rng);
    const Eigen::VectorXd b = sample(m, 5, rng);
    CHECK(a == b);
    CHECK(a != sample(m, 5, CounterRng(10)));
    CHECK(a != sample(m, 6, rng));
  }

  TEST_CASE("rare events touch one group at one step") {
    const auto part = GroupPartition::contiguous({{"A", 30}, {"B", 70}});
    const GradientModel plain(100, IidSign{}, 1, {}, part);
    const GradientModel spiked(100, IidSign{}, 1, {{7, "B", 1e4}}, part);
    const CounterRng rng(12);
    for (std::uint64_t t : {6u, 7u, 8u}) {
      const Eigen::VectorXd a = sample(plain, t, rng), b = sample(spiked, t, rng);
      CHECK(a.head(30) == b.head(30));
      if (t == 7) {
        CHECK(b.tail(70) == 1e4 * a.tail(70));
      } else {
        CHECK(a.tail(70) == b.tail(70));
      }
    }
    CHECK_THROWS_AS(GradientModel(100, IidSign{}, 1, {{7, "C", 2.0}}, part), std::invalid_argument);
  }

  TEST_CASE("layered model applies schedules per group") {
    const auto part = GroupPartition::contiguous({{"G", 10}, {"R", 10}});
    Layered lay{part,
                {{"G", CorrelatedSign{1.0}, ScaleSchedule{1.0, 1e-4, 0, 10}, ScaleSchedule::constant(1.0)},
                 {"R", IidSign{}, ScaleSchedule::constant(2.0), ScaleSchedule::constant(1.0)}}};
    const GradientModel m(20, lay);
    const CounterRng rng(1);
    CHECK(sample(m, 10, rng).head(10).cwiseAbs().maxCoeff() <= 2e-4 + 1e-18);
    CHECK(sample(m, 10, rng).tail(10).cwiseAbs().minCoeff() == 2.0);
    CHECK(m.group_factor(0, 5) == doctest::Approx(1e-2));
  }

  TEST_CASE("scale schedule is log-linear") {
    const ScaleSchedule s{1.0, 1e-4, 10, 20};
    CHECK(s(0) == 1.0);
    CHECK(s(10) == 1.0);
    CHECK(s(15) == doctest::Approx(1e-2));
    CHECK(s(25) == 1e-4);
    CHECK_THROWS_AS((ScaleSchedule{0.0, 1.0, 0, 1}.validate()), std::invalid_argument);
  }

  TEST_CASE("quadratic exact gradients") {
    Eigen::MatrixXd h(2, 2);
    h << 2, 1, 1, 3;
    Eigen::VectorXd ts(2);
    ts << 1, -1;
    const auto obj = std::make_shared<QuadraticObjective<double>>(QuadraticObjective<double>::dense(h, ts));
    const GradientModel m(2, QuadraticExact{obj});
    Eigen::VectorXd theta(2);
    theta << 0, 0;
    const Eigen::VectorXd g = gradient(m, 1, CounterRng(1), theta);
    CHECK(g[0] == doctest::Approx(-1.0));
    CHECK(g[1] == doctest::Approx(2.0));
    CHECK_THROWS_AS(sample(m, 1, CounterRng(1)), UnsupportedError);
  }

  TEST_CASE("constructor validation") {
    CHECK_THROWS_AS(GradientModel(0, IidSign{}), std::invalid_argument);
    CHECK_THROWS_AS(GradientModel(3, IidSign{}, 0), std::invalid_argument);
    CHECK_THROWS_AS(GradientModel(3, IidGaussian{-1.0}), std::invalid_argument);
    CHECK(variant_name(ModelVariant{CorrelatedSign{}}) == "CorrelatedSign");
  }
}
