#pragma once

#include "adamlab/partition.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace adamlab {

enum class EpsilonPolicy {
  Standard,   // u = m / (sqrt(v) + eps)
  ZeroGuard,  // eps = 0, u = m / sqrt(v), and u = 0 wherever v = 0
};

// Which moment recursion the state follows.
//
// Compounded: every step divides the whole running average by (1 - beta^t):
//   m_t = beta/(1-beta^t) m_{t-1} + (1-beta)/(1-beta^t) g_t.
// Textbook: the usual bias-corrected estimates m_hat = m_raw/(1-beta^t). The
// state stores m_hat, which obeys
//   m_t = beta (1-beta^{t-1})/(1-beta^t) m_{t-1} + (1-beta)/(1-beta^t) g_t.
// The two agree as t -> infinity but the compounded form has a long transient: its
// coefficient sum for beta = 0.95 peaks near 1e10 around t = 58 and only
// returns to 1 after roughly a thousand steps.
enum class Recursion { Compounded, Textbook };

using StepSize = std::function<double(std::uint64_t)>;

inline StepSize constant_step(double eta) {
  return [eta](std::uint64_t) { return eta; };
}

struct AdamParams {
  double beta1 = 0.9;
  double beta2 = 0.95;
  double epsilon = 1e-8;
  StepSize eta = constant_step(1e-3);
  EpsilonPolicy policy = EpsilonPolicy::Standard;
  Recursion recursion = Recursion::Compounded;

  void validate() const {
    if (!(beta1 > 0.0 && beta1 < 1.0))
      throw std::invalid_argument("beta1 must lie in (0, 1)");
    if (!(beta2 > 0.0 && beta2 < 1.0))
      throw std::invalid_argument("beta2 must lie in (0, 1)");
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon))
      throw std::invalid_argument("epsilon must be finite and >= 0");
    if (policy == EpsilonPolicy::ZeroGuard && epsilon != 0.0)
      throw std::invalid_argument("ZeroGuard policy requires epsilon = 0");
    if (!eta) throw std::invalid_argument("step-size schedule is empty");
  }

  double step_size(std::uint64_t t) const {
    const double e = eta(t);
    if (!(e > 0.0) || !std::isfinite(e))
      throw std::invalid_argument("step size must be positive at t = " +
                                  std::to_string(t));
    return e;
  }
};

/// Optimizer accumulators. `clock[i]` is the number of steps coordinate i has
/// seen since its last reset; `t` counts all steps applied to the state.
template <typename Scalar = double>
struct AdamState {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Vector m;
  Vector v;
  std::vector<std::uint64_t> clock;
  std::uint64_t t = 0;

  AdamState() = default;
  explicit AdamState(Eigen::Index n)
      : m(Vector::Zero(n)), v(Vector::Zero(n)), clock(static_cast<std::size_t>(n), 0) {}

  Eigen::Index size() const { return m.size(); }
};

template <typename Scalar = double>
struct UpdateVector {
  typename AdamState<Scalar>::Vector u;
  std::uint64_t t = 0;
};

template <typename Scalar = double>
struct RatioVector {
  typename AdamState<Scalar>::Vector r;
  std::uint64_t t = 0;
};

namespace detail {

struct MomentCoefficients {
  double keep = 0.0;  // multiplies the previous accumulator
  double feed = 0.0;  // multiplies the new observation
};

inline MomentCoefficients coefficients(double beta, std::uint64_t k, Recursion rec) {
  const double denom = 1.0 - std::pow(beta, static_cast<double>(k));
  if (rec == Recursion::Compounded) return {beta / denom, (1.0 - beta) / denom};
  const double prev = 1.0 - std::pow(beta, static_cast<double>(k - 1));
  return {beta * prev / denom, (1.0 - beta) / denom};
}

template <typename Scalar>
Scalar guarded_quotient(Scalar m, Scalar v) {
  return v > Scalar(0) ? m / std::sqrt(v) : Scalar(0);
}

}  // namespace detail

/// u computed from the current accumulators (no state change).
template <typename Scalar>
UpdateVector<Scalar> update(const AdamState<Scalar>& state, const AdamParams& params) {
  UpdateVector<Scalar> out{typename AdamState<Scalar>::Vector(state.size()), state.t};
  const bool guarded = params.policy == EpsilonPolicy::ZeroGuard || params.epsilon == 0.0;
  const Scalar eps = static_cast<Scalar>(params.epsilon);
  for (Eigen::Index i = 0; i < state.size(); ++i) {
    out.u[i] = guarded ? detail::guarded_quotient(state.m[i], state.v[i])
                       : state.m[i] / (std::sqrt(state.v[i]) + eps);
  }
  return out;
}

/// Advances `state` in place by one step with gradient `g`; returns u_t.
/// Parameter updates (theta -= eta * u) are left to the caller.
template <typename Scalar>
UpdateVector<Scalar> advance(AdamState<Scalar>& state,
                             const Eigen::Ref<const typename AdamState<Scalar>::Vector>& g,
                             const AdamParams& params) {
  if (g.size() != state.size())
    throw std::invalid_argument("gradient has " + std::to_string(g.size()) +
                                " entries, state has " + std::to_string(state.size()));
  if (!g.allFinite())
    throw std::domain_error("non-finite gradient entry at step " +
                            std::to_string(state.t + 1));

  std::uint64_t cached = 0;
  detail::MomentCoefficients c1, c2;
  for (Eigen::Index i = 0; i < state.size(); ++i) {
    const std::uint64_t k = ++state.clock[static_cast<std::size_t>(i)];
    if (k != cached) {
      c1 = detail::coefficients(params.beta1, k, params.recursion);
      c2 = detail::coefficients(params.beta2, k, params.recursion);
      cached = k;
    }
    const Scalar gi = g[i];
    state.m[i] = static_cast<Scalar>(c1.keep) * state.m[i] + static_cast<Scalar>(c1.feed) * gi;
    state.v[i] = static_cast<Scalar>(c2.keep) * state.v[i] + static_cast<Scalar>(c2.feed) * gi * gi;
  }
  ++state.t;
  return update(state, params);
}

/// Value-semantics form: returns the successor state together with u_t.
template <typename Scalar>
std::pair<AdamState<Scalar>, UpdateVector<Scalar>> adam_step(
    AdamState<Scalar> state, const Eigen::Ref<const typename AdamState<Scalar>::Vector>& g,
    const AdamParams& params) {
  auto u = advance(state, g, params);
  return {std::move(state), std::move(u)};
}

/// r = m / sqrt(v) with 0/0 mapped to 0 (u at eps = 0).
template <typename DerivedM, typename DerivedV>
auto ratio(const Eigen::MatrixBase<DerivedM>& m, const Eigen::MatrixBase<DerivedV>& v) {
  using Scalar = typename DerivedM::Scalar;
  if (m.size() != v.size()) throw std::invalid_argument("m and v differ in length");
  if (!m.allFinite() || !v.allFinite())
    throw std::domain_error("non-finite optimizer state");
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> r(m.size());
  for (Eigen::Index i = 0; i < m.size(); ++i)
    r[i] = detail::guarded_quotient<Scalar>(m[i], v[i]);
  return r;
}

template <typename Scalar>
RatioVector<Scalar> ratio(const AdamState<Scalar>& state) {
  return {ratio(state.m, state.v), state.t};
}

/// Zeroes m and v for the indices of `g` and restarts their step clocks.
template <typename Scalar>
void reset_group(AdamState<Scalar>& state, const Group& g) {
  segment(state.m, g).setZero();
  segment(state.v, g).setZero();
  for (Eigen::Index i = g.start; i < g.end(); ++i) state.clock[static_cast<std::size_t>(i)] = 0;
}

// Closed-form weights of the Compounded recursion: m_t = sum_tau w_t[tau] g_tau,
//   w_t[tau] = beta^(t-tau) (1-beta) / prod_{T=tau..t} (1 - beta^T).
// The same formula with beta2 gives the weights of g^2 in v_t.

/// All weights w_t[1..t] (index tau-1).
inline std::vector<double> weight_coefficients(std::uint64_t t, double beta) {
  if (t == 0) throw std::invalid_argument("weights need t >= 1");
  std::vector<double> w(t);
  double prod = 1.0;
  double power = 1.0;  // beta^(t - tau)
  for (std::uint64_t tau = t; tau >= 1; --tau) {
    prod *= 1.0 - std::pow(beta, static_cast<double>(tau));
    w[tau - 1] = power * (1.0 - beta) / prod;
    power *= beta;
  }
  return w;
}

inline double weight_coefficient(std::uint64_t t, std::uint64_t tau, double beta) {
  if (tau < 1 || tau > t)
    throw std::invalid_argument("weight index tau must satisfy 1 <= tau <= t");
  double prod = 1.0;
  for (std::uint64_t T = tau; T <= t; ++T) prod *= 1.0 - std::pow(beta, static_cast<double>(T));
  return std::pow(beta, static_cast<double>(t - tau)) * (1.0 - beta) / prod;
}

enum class MomentOrder { First = 1, Second = 2 };

inline double weight_coefficient(MomentOrder order, std::uint64_t t, std::uint64_t tau,
                                 const AdamParams& params) {
  return weight_coefficient(t, tau, order == MomentOrder::First ? params.beta1 : params.beta2);
}

/// Gamma_t(beta) = sum_tau w_t[tau]^2.
inline double gamma_partial(double beta, std::uint64_t t) {
  double sum = 0.0;
  for (double w : weight_coefficients(t, beta)) sum += w * w;
  return sum;
}

/// Sum of the Compounded weights (tends to 1 as t grows; equals 1 at t = 1).
inline double weight_sum(double beta, std::uint64_t t) {
  double s = 0.0;
  for (std::uint64_t k = 1; k <= t; ++k)
    s = (beta * s + (1.0 - beta)) / (1.0 - std::pow(beta, static_cast<double>(k)));
  return s;
}

}  // namespace adamlab
