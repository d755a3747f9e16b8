#pragma once

#include "adamlab/errors.hpp"
#include "adamlab/rng.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace adamlab {

/// Dense symmetric matrix. Built from a lower triangle and mirrored, so
/// A(i, j) == A(j, i) holds bit-exactly.
template <typename Scalar = double>
class SymmetricMatrix {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  SymmetricMatrix() = default;
  explicit SymmetricMatrix(Eigen::Index n) : a_(Matrix::Zero(n, n)) {}

  template <typename Derived>
  static SymmetricMatrix from_lower(const Eigen::MatrixBase<Derived>& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("symmetric matrix must be square");
    SymmetricMatrix s;
    s.a_ = m.template triangularView<Eigen::Lower>();
    s.a_.template triangularView<Eigen::StrictlyUpper>() = s.a_.transpose();
    if (!s.a_.allFinite()) throw std::invalid_argument("symmetric matrix entries must be finite");
    return s;
  }

  Eigen::Index size() const { return a_.rows(); }
  Scalar operator()(Eigen::Index i, Eigen::Index j) const { return a_(i, j); }
  void set(Eigen::Index i, Eigen::Index j, Scalar v) {
    a_(i, j) = v;
    a_(j, i) = v;
  }
  const Matrix& dense() const { return a_; }

  Scalar trace() const { return a_.trace(); }
  Scalar frobenius_squared() const { return a_.squaredNorm(); }
  Scalar max_abs() const { return a_.cwiseAbs().maxCoeff(); }

  /// S * S, re-symmetrized from its lower triangle.
  SymmetricMatrix squared() const {
    const Matrix p = a_ * a_;
    return from_lower(p);
  }

 private:
  Matrix a_;
};

enum class WignerEnsemble { Gaussian, Rademacher };

/// iid unit-variance entries on and below the diagonal, mirrored.
template <typename Scalar = double>
SymmetricMatrix<Scalar> sample_wigner(Eigen::Index n, const CounterRng& rng,
                                      WignerEnsemble ensemble = WignerEnsemble::Gaussian) {
  if (n < 2) throw std::invalid_argument("Wigner matrix needs n >= 2");
  SequentialRng gen(rng);
  typename SymmetricMatrix<Scalar>::Matrix low(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = j; i < n; ++i)
      low(i, j) = static_cast<Scalar>(ensemble == WignerEnsemble::Gaussian ? gen.normal() : gen.sign());
  return SymmetricMatrix<Scalar>::from_lower(low);
}

template <typename Scalar = double>
struct Spectrum {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> eigenvalues;  // ascending
  Scalar residual = 0;  // off-diagonal Frobenius norm left after the last sweep
  int sweeps = 0;
};

struct JacobiOptions {
  int max_sweeps = 100;
  double tolerance = 1e-14;  // stop when off(A) <= tolerance * ||A||_F
};

// Cyclic Jacobi. Within a sweep, pairs whose |a(p, q)| is below a threshold
// tied to the current off-diagonal norm are skipped. Pairs are visited in round-robin order: each round is a set of disjoint
// (p, q) pairs, so its rotations commute and are applied together, first to
// the columns and then to the rows one column at a time. Both passes walk
// memory contiguously.
template <typename Scalar>
Spectrum<Scalar> eigenvalues(const SymmetricMatrix<Scalar>& m, const JacobiOptions& opt = {}) {
  using std::abs;
  using std::sqrt;
  const Eigen::Index n = m.size();
  typename SymmetricMatrix<Scalar>::Matrix a = m.dense();
  const Scalar norm = sqrt(a.squaredNorm());
  Spectrum<Scalar> out;

  auto off_norm = [&] {
    Scalar s = 0;
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = j + 1; i < n; ++i) s += a(i, j) * a(i, j);
    return sqrt(Scalar(2) * s);
  };

  struct Rotation {
    Eigen::Index p, q;
    Scalar c, s, app, aqq, shift;  // shift = t * a(p, q)
  };
  const Eigen::Index slots = n + n % 2;  // odd n gets a bye slot
  std::vector<Eigen::Index> ring(static_cast<std::size_t>(slots));
  std::vector<Rotation> rots;
  rots.reserve(static_cast<std::size_t>(slots / 2));

  Scalar off = off_norm();
  while (off > static_cast<Scalar>(opt.tolerance) * norm && norm > 0) {
    if (out.sweeps == opt.max_sweeps)
      throw NumericalError("Jacobi eigensolver did not converge after " +
                           std::to_string(out.sweeps) + " sweeps");
    ++out.sweeps;
    // About half the RMS off-diagonal entry; the largest entry always clears it.
    const Scalar thresh = Scalar(0.5) * off / static_cast<Scalar>(n);
    for (Eigen::Index k = 0; k < slots; ++k) ring[static_cast<std::size_t>(k)] = k;

    for (Eigen::Index round = 0; round + 1 < slots; ++round) {
      rots.clear();
      for (Eigen::Index k = 0; k < slots / 2; ++k) {
        Eigen::Index p = ring[static_cast<std::size_t>(k)];
        Eigen::Index q = ring[static_cast<std::size_t>(slots - 1 - k)];
        if (p >= n || q >= n) continue;
        if (p > q) std::swap(p, q);
        const Scalar apq = a(p, q);
        if (apq == Scalar(0) || abs(apq) <= thresh) continue;
        const Scalar app = a(p, p), aqq = a(q, q);
        const Scalar theta = (aqq - app) / (Scalar(2) * apq);
        Scalar t = Scalar(1) / (abs(theta) + sqrt(theta * theta + Scalar(1)));
        if (theta < 0) t = -t;
        const Scalar c = Scalar(1) / sqrt(t * t + Scalar(1));
        rots.push_back({p, q, c, t * c, app, aqq, t * apq});
      }
      std::rotate(ring.begin() + 1, ring.end() - 1, ring.end());
      if (rots.empty()) continue;

      for (const auto& r : rots) {
        Scalar* cp = a.col(r.p).data();
        Scalar* cq = a.col(r.q).data();
        for (Eigen::Index k = 0; k < n; ++k) {
          const Scalar xp = cp[k], xq = cq[k];
          cp[k] = r.c * xp - r.s * xq;
          cq[k] = r.s * xp + r.c * xq;
        }
      }
      for (Eigen::Index j = 0; j < n; ++j) {
        Scalar* col = a.col(j).data();
        for (const auto& r : rots) {
          const Scalar xp = col[r.p], xq = col[r.q];
          col[r.p] = r.c * xp - r.s * xq;
          col[r.q] = r.s * xp + r.c * xq;
        }
      }
      for (const auto& r : rots) {
        a(r.p, r.p) = r.app - r.shift;
        a(r.q, r.q) = r.aqq + r.shift;
        a(r.p, r.q) = a(r.q, r.p) = Scalar(0);
      }
    }
    // The two passes round (i, j) and (j, i) differently.
    a.template triangularView<Eigen::StrictlyUpper>() = a.transpose();
    off = off_norm();
  }

  out.residual = off;
  out.eigenvalues = a.diagonal();
  std::sort(out.eigenvalues.data(), out.eigenvalues.data() + n);
  return out;
}

struct SemicircleReport {
  Eigen::Index n = 0;
  int trials = 0;
  double first_moment = 0.0;         // E[lambda/(2 sqrt n) + 1/2]
  double second_moment = 0.0;        // E[(lambda/(2 sqrt n) + 1/2)^2]
  double beta_second_moment = 0.0;   // E[(lambda/(4 sqrt n) + 1/2)^2]
  double mean_square_over_n = 0.0;   // E[lambda^2] / n
  double cdf_sup_distance = 0.0;     // lambda/(2 sqrt n) vs (2/pi) sqrt(1 - x^2)
  std::vector<double> scaled;        // pooled lambda/(2 sqrt n), ascending
};

/// CDF of the density (2/pi) sqrt(1 - x^2) on [-1, 1].
double semicircle_cdf(double x);

SemicircleReport semicircle_check(Eigen::Index n, int trials, const CounterRng& rng,
                                  WignerEnsemble ensemble = WignerEnsemble::Gaussian);

struct ScalingRow {
  Eigen::Index n = 0;
  double mean_eigenvalue = 0.0;  // mean eigenvalue of S^2
  double mean_lambda_sq = 0.0;   // mean of lambda(S)^2
  double target = 0.0;           // n / 4
  double min_eigenvalue = 0.0;
  double max_spectrum_mismatch = 0.0;  // max relative |lambda(S^2) - sort(lambda(S)^2)|
};

struct ScalingReport {
  std::vector<ScalingRow> rows;
  int trials = 0;
  double slope = 0.0;
};

ScalingReport squared_spectrum_scaling(const std::vector<Eigen::Index>& n_list, int trials,
                                       const CounterRng& rng,
                                       WignerEnsemble ensemble = WignerEnsemble::Gaussian);

}  // namespace adamlab
