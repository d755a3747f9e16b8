#pragma once

#include "adamlab/rng.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace adamlab {

using SampleView = Eigen::Ref<const Eigen::VectorXd>;

struct SampleSummary {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  // population (1/n) convention
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  double min = 0.0;
  double max = 0.0;

  double stddev() const;
};

SampleSummary summarize(const SampleView& x);

struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::size_t> counts;

  std::size_t bins() const { return counts.size(); }
  double width() const { return (hi - lo) / static_cast<double>(counts.size()); }
  double left(std::size_t k) const { return lo + width() * static_cast<double>(k); }
  double right(std::size_t k) const { return k + 1 == bins() ? hi : left(k + 1); }
  double center(std::size_t k) const { return lo + width() * (static_cast<double>(k) + 0.5); }
  std::size_t argmax() const;
  std::size_t total() const;

  /// Columns bin_left,bin_right,count.
  void write_csv(std::ostream& os) const;
};

/// Fixed-width histogram over [lo, hi]; values outside are dropped, hi is
/// counted in the last bin.
Histogram histogram(const SampleView& x, std::size_t bins, double lo, double hi);
Histogram histogram(const SampleView& x, std::size_t bins);

// Dip convention: the value returned is the sup-distance between the
// empirical CDF and the closest unimodal CDF, as produced by the
// Hartigan & Hartigan (1985) algorithm. Range [1/(2n), 1/4].
inline constexpr const char* kDipConvention =
    "sup-distance to the nearest unimodal CDF (Hartigan & Hartigan); range [1/(2n), 1/4]";

struct DipResult {
  double dip = 0.0;
  std::size_t n = 0;
  std::optional<double> p_value;
  std::size_t n_boot = 0;
  std::size_t modal_low = 0;   // index range of the modal interval
  std::size_t modal_high = 0;
};

/// Requires n >= 4 and ascending input (std::invalid_argument otherwise).
DipResult dip_statistic(const SampleView& sorted);

/// Dip plus p-value against uniform samples of the same size. Input need not
/// be sorted. Null distributions are cached per (n, n_boot, seed).
DipResult dip_test(const SampleView& samples, std::size_t n_boot, const CounterRng& rng);

/// Sorted dips of `n_boot` uniform samples of size n.
const std::vector<double>& dip_null(std::size_t n, std::size_t n_boot, const CounterRng& rng);

enum class Modality { Unimodal, Bimodal, SpikedAtZero };

std::string to_string(Modality m);
Modality modality_from_string(const std::string& s);

struct ModalityThresholds {
  double spike_delta = 0.05;
  double spike_fraction = 0.5;
  double bimodal_p = 0.01;
  std::size_t n_boot = 200;
  std::size_t bins = 101;
};

struct ModalityReport {
  Modality cls = Modality::Unimodal;
  DipResult dip;
  std::vector<double> modes;
  double zero_mass_fraction = 0.0;
};

/// Requires n >= 100.
ModalityReport classify_modality(const SampleView& samples, const ModalityThresholds& th,
                                 const CounterRng& rng);

/// Sup-distance between the empirical CDFs of two samples.
double ks_distance(const SampleView& a, const SampleView& b);

/// Sup-distance between the cumulative normalised histograms of two samples
/// binned on a common grid over their joint range.
double histogram_distance(const SampleView& a, const SampleView& b, std::size_t bins = 101);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

double median(std::vector<double> v);

}  // namespace adamlab
