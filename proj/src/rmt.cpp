#include "adamlab/rmt.hpp"

#include "adamlab/statlab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace adamlab {

double semicircle_cdf(double x) {
  if (x <= -1.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return 0.5 + (x * std::sqrt(1.0 - x * x) + std::asin(x)) / std::numbers::pi;
}

SemicircleReport semicircle_check(Eigen::Index n, int trials, const CounterRng& rng,
                                  WignerEnsemble ensemble) {
  if (n < 64) throw std::invalid_argument("semicircle check needs n >= 64");
  if (trials < 10) throw std::invalid_argument("semicircle check needs trials >= 10");
  SemicircleReport rep;
  rep.n = n;
  rep.trials = trials;
  const double root = std::sqrt(static_cast<double>(n));
  rep.scaled.reserve(static_cast<std::size_t>(n * trials));

  double s1 = 0.0, s2 = 0.0, sb = 0.0, sq = 0.0;
  for (int k = 0; k < trials; ++k) {
    const auto s = sample_wigner(n, rng.substream(static_cast<std::uint64_t>(k)), ensemble);
    const auto spec = eigenvalues(s);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double lam = spec.eigenvalues[i];
      const double x = lam / (2.0 * root) + 0.5;
      const double b = lam / (4.0 * root) + 0.5;
      s1 += x;
      s2 += x * x;
      sb += b * b;
      sq += lam * lam;
      rep.scaled.push_back(lam / (2.0 * root));
    }
  }
  const double total = static_cast<double>(n) * trials;
  rep.first_moment = s1 / total;
  rep.second_moment = s2 / total;
  rep.beta_second_moment = sb / total;
  rep.mean_square_over_n = sq / total / static_cast<double>(n);

  std::sort(rep.scaled.begin(), rep.scaled.end());
  const double m = static_cast<double>(rep.scaled.size());
  double d = 0.0;
  for (std::size_t i = 0; i < rep.scaled.size(); ++i) {
    const double f = semicircle_cdf(rep.scaled[i]);
    d = std::max({d, std::abs(f - static_cast<double>(i) / m), std::abs(static_cast<double>(i + 1) / m - f)});
  }
  rep.cdf_sup_distance = d;
  return rep;
}

ScalingReport squared_spectrum_scaling(const std::vector<Eigen::Index>& n_list, int trials,
                                       const CounterRng& rng, WignerEnsemble ensemble) {
  if (trials < 1) throw std::invalid_argument("scaling needs trials >= 1");
  ScalingReport rep;
  rep.trials = trials;
  std::vector<double> xs, ys;
  for (const Eigen::Index n : n_list) {
    if (n < 64) throw std::invalid_argument("scaling needs every n >= 64");
    ScalingRow row;
    row.n = n;
    row.target = static_cast<double>(n) / 4.0;
    row.min_eigenvalue = std::numeric_limits<double>::infinity();
    const CounterRng sub = rng.substream(static_cast<std::uint64_t>(n));
    for (int k = 0; k < trials; ++k) {
      const auto s = sample_wigner(n, sub.substream(static_cast<std::uint64_t>(k)), ensemble);
      const auto sq = eigenvalues(s.squared());
      Eigen::VectorXd lam2 = eigenvalues(s).eigenvalues.array().square();
      std::sort(lam2.data(), lam2.data() + n);
      row.mean_eigenvalue += sq.eigenvalues.mean() / trials;
      row.mean_lambda_sq += lam2.mean() / trials;
      row.min_eigenvalue = std::min(row.min_eigenvalue, sq.eigenvalues.minCoeff());
      const double scale = lam2.cwiseAbs().maxCoeff();
      row.max_spectrum_mismatch = std::max(
          row.max_spectrum_mismatch, (sq.eigenvalues - lam2).cwiseAbs().maxCoeff() / scale);
    }
    xs.push_back(static_cast<double>(n));
    ys.push_back(row.mean_eigenvalue);
    rep.rows.push_back(row);
  }
  if (xs.size() >= 2) rep.slope = loglog_slope(xs, ys);
  return rep;
}

}  // namespace adamlab
