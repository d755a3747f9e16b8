#include "adamlab/divergence.hpp"

#include "adamlab/statlab.hpp"

#include <cmath>

namespace adamlab {

EtaScalingReport critical_eta_scaling(const std::vector<Eigen::Index>& n_list, int trials,
                                      const CounterRng& rng, HessianKind kind, double beta1,
                                      double beta2) {
  if (trials < 20) throw std::invalid_argument("eta scaling needs trials >= 20");
  EtaScalingReport rep;
  rep.kind = kind;
  const double c = beta1 / std::sqrt(beta2);
  std::vector<double> xs, ys;
  for (const Eigen::Index n : n_list) {
    if (n < 64) throw std::invalid_argument("eta scaling needs every n >= 64");
    EtaScalingRow row;
    row.n = n;
    std::vector<double> etas;
    const CounterRng sub = rng.substream(static_cast<std::uint64_t>(n));
    for (int k = 0; k < trials; ++k) {
      const CounterRng trial = sub.substream(static_cast<std::uint64_t>(k));
      SequentialRng gen(trial.substream(1));
      Eigen::VectorXd g(n);
      for (Eigen::Index i = 0; i < n; ++i) g[i] = gen.sign();
      const Eigen::VectorXd u = g.cwiseSign() * c;

      DescentCheck d;
      if (kind == HessianKind::Identity) {
        d = descent_condition(g, u, IdentityHessian{n}, 1.0);
      } else {
        const auto s = sample_wigner(n, trial.substream(2));
        const auto f = QuadraticObjective<double>::square_of(s.dense(), Eigen::VectorXd::Zero(n));
        d = descent_condition(g, u, f, 1.0);
      }
      if (d.eta_critical) {
        etas.push_back(*d.eta_critical);
        ++row.used;
      } else {
        ++row.discarded;
      }
    }
    if (etas.empty()) throw NumericalError("every eta_critical draw was discarded at n = " + std::to_string(n));
    row.median_eta = median(etas);
    xs.push_back(static_cast<double>(n));
    ys.push_back(row.median_eta);
    rep.rows.push_back(row);
  }
  if (xs.size() >= 2) rep.slope = loglog_slope(xs, ys);
  return rep;
}

std::size_t LossSeries::monotone_increase_from() const {
  if (loss.size() < 2) return loss.size();
  std::size_t k = loss.size() - 1;
  while (k > 0 && loss[k - 1] <= loss[k]) --k;
  return k == loss.size() - 1 ? loss.size() : k;
}

LossSeries loss_trajectory(const QuadraticObjective<double>& objective, const AdamParams& params,
                           const GradientModel& model, std::uint64_t steps,
                           const Eigen::Ref<const Eigen::VectorXd>& theta0, const CounterRng& rng) {
  if (steps < 1) throw std::invalid_argument("trajectory needs steps >= 1");
  if (theta0.size() != objective.size() || model.size() != objective.size())
    throw std::invalid_argument("objective, model and theta0 dimensions differ");
  params.validate();
  LossSeries out;
  Eigen::VectorXd theta = theta0;
  AdamState<double> state(theta.size());
  for (std::uint64_t t = 1; t <= steps + 1; ++t) {
    const double f = objective.value(theta);
    if (!std::isfinite(f)) {
      out.diverged = true;
      out.diverged_at = t;
      return out;
    }
    out.loss.push_back(f);
    if (t > steps) break;
    const Eigen::VectorXd g = gradient(model, t, rng, theta);
    if (!g.allFinite()) {
      out.diverged = true;
      out.diverged_at = t;
      return out;
    }
    const auto u = advance(state, g, params);
    theta -= params.step_size(t) * u.u;
  }
  return out;
}

ProxyReport hessian_proxy_check(const Eigen::Ref<const Eigen::VectorXd>& diagonal, double sigma,
                                std::uint64_t samples, const AdamParams& params,
                                const CounterRng& rng) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  if (samples < 1) throw std::invalid_argument("proxy check needs samples >= 1");
  params.validate();
  const Eigen::Index n = diagonal.size();
  Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(n);
  AdamState<double> state(n);
  Eigen::VectorXd g(n);
  for (std::uint64_t s = 1; s <= samples; ++s) {
    for (Eigen::Index i = 0; i < n; ++i)
      g[i] = diagonal[i] * sigma * rng.normal(static_cast<std::uint64_t>(i), s);
    sum_sq += g.cwiseAbs2();
    advance(state, g, params);
  }
  ProxyReport rep;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (diagonal[i] == 0.0) {
      rep.excluded.push_back(i);
      continue;
    }
    const double scale = sigma * std::abs(diagonal[i]);
    rep.ratios.push_back(std::sqrt(sum_sq[i] / static_cast<double>(samples)) / scale);
    rep.adam_ratios.push_back(std::sqrt(state.v[i]) / scale);
    rep.max_deviation = std::max(rep.max_deviation, std::abs(rep.ratios.back() - 1.0));
  }
  return rep;
}

}  // namespace adamlab
