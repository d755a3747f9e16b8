#pragma once

#include "adamlab/gradients.hpp"
#include "adamlab/optimizer.hpp"
#include "adamlab/quadratic.hpp"
#include "adamlab/rmt.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace adamlab {

/// Both sides of <grad, u> > (eta/2) u^T H u.
struct DescentCheck {
  double lhs = 0.0;        // <grad, u>
  double rhs = 0.0;        // (eta/2) u^T H u
  double curvature = 0.0;  // u^T H u
  bool satisfied = false;
  std::optional<double> eta_critical;  // 2 lhs / curvature, when both are positive
};

/// H = I without storage.
struct IdentityHessian {
  Eigen::Index n = 0;
};

namespace detail {

inline double curvature_of(const IdentityHessian& h, const Eigen::Ref<const Eigen::VectorXd>& u) {
  if (h.n != u.size()) throw std::invalid_argument("Hessian and update dimensions differ");
  return u.squaredNorm();
}
inline double curvature_of(const Eigen::MatrixXd& h, const Eigen::Ref<const Eigen::VectorXd>& u) {
  if (h.rows() != u.size() || h.cols() != u.size())
    throw std::invalid_argument("Hessian and update dimensions differ");
  return u.dot(h * u);
}
inline double curvature_of(const SymmetricMatrix<double>& h,
                           const Eigen::Ref<const Eigen::VectorXd>& u) {
  return curvature_of(h.dense(), u);
}
inline double curvature_of(const QuadraticObjective<double>& f,
                           const Eigen::Ref<const Eigen::VectorXd>& u) {
  return f.curvature(u);
}

}  // namespace detail

/// `hessian` is a dense matrix, a SymmetricMatrix or a QuadraticObjective
/// (whose factored form evaluates u^T S^2 u as ||S u||^2).
template <typename Hessian>
DescentCheck descent_condition(const Eigen::Ref<const Eigen::VectorXd>& grad,
                               const Eigen::Ref<const Eigen::VectorXd>& u, const Hessian& hessian,
                               double eta) {
  if (grad.size() != u.size()) throw std::invalid_argument("gradient and update dimensions differ");
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  DescentCheck d;
  d.lhs = grad.dot(u);
  d.curvature = detail::curvature_of(hessian, u);
  d.rhs = 0.5 * eta * d.curvature;
  d.satisfied = d.lhs > d.rhs;
  if (d.lhs > 0.0 && d.curvature > 0.0) d.eta_critical = 2.0 * d.lhs / d.curvature;
  return d;
}

enum class HessianKind { WignerSquared, Identity };

struct EtaScalingRow {
  Eigen::Index n = 0;
  double median_eta = 0.0;
  int used = 0;
  int discarded = 0;
};

struct EtaScalingReport {
  HessianKind kind = HessianKind::WignerSquared;
  std::vector<EtaScalingRow> rows;
  double slope = 0.0;
};

// Per trial: H = S^2 (S Wigner) or I, g with iid +-1 entries, and
// u = sign(g) beta1 / sqrt(beta2).
EtaScalingReport critical_eta_scaling(const std::vector<Eigen::Index>& n_list, int trials,
                                      const CounterRng& rng, HessianKind kind = HessianKind::WignerSquared,
                                      double beta1 = 0.9, double beta2 = 0.95);

struct LossSeries {
  std::vector<double> loss;  // loss[k] = f(theta) before step k + 1; last entry after the final step
  bool diverged = false;
  std::optional<std::uint64_t> diverged_at;

  /// First index from which the series never decreases again (size() if none).
  std::size_t monotone_increase_from() const;
};

LossSeries loss_trajectory(const QuadraticObjective<double>& objective, const AdamParams& params,
                           const GradientModel& model, std::uint64_t steps,
                           const Eigen::Ref<const Eigen::VectorXd>& theta0, const CounterRng& rng);

struct ProxyReport {
  std::vector<double> ratios;          // sqrt(mean g^2) / (sigma |H_ii|), non-zero diagonals only
  std::vector<double> adam_ratios;     // same with v from the optimizer recursion
  std::vector<Eigen::Index> excluded;  // indices with H_ii == 0
  double max_deviation = 0.0;          // max |ratio - 1|
};

/// theta = theta* + sigma z with z standard normal, g = H (theta - theta*).
ProxyReport hessian_proxy_check(const Eigen::Ref<const Eigen::VectorXd>& diagonal, double sigma,
                                std::uint64_t samples, const AdamParams& params,
                                const CounterRng& rng);

}  // namespace adamlab
