#include "adamlab/statlab.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace adamlab {

double SampleSummary::stddev() const { return std::sqrt(variance); }

SampleSummary summarize(const SampleView& x) {
  SampleSummary s;
  s.n = static_cast<std::size_t>(x.size());
  if (s.n < 2) throw std::invalid_argument("summary needs at least 2 samples");
  s.mean = x.mean();
  s.min = x.minCoeff();
  s.max = x.maxCoeff();
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double d = x[i] - s.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  const double n = static_cast<double>(s.n);
  m2 /= n;
  m3 /= n;
  m4 /= n;
  s.variance = m2;
  if (m2 > 0.0) {
    s.skewness = m3 / std::pow(m2, 1.5);
    s.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  }
  return s;
}

std::size_t Histogram::argmax() const {
  return static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

std::size_t Histogram::total() const {
  std::size_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

void Histogram::write_csv(std::ostream& os) const {
  const auto old = os.precision(17);
  os << "bin_left,bin_right,count\n";
  for (std::size_t k = 0; k < bins(); ++k)
    os << left(k) << ',' << right(k) << ',' << counts[k] << '\n';
  os.precision(old);
}

Histogram histogram(const SampleView& x, std::size_t bins, double lo, double hi) {
  if (bins == 0) throw std::invalid_argument("histogram needs at least one bin");
  if (!(hi > lo)) hi = lo + 1.0;  // degenerate sample: one unit-wide range
  Histogram h{lo, hi, std::vector<std::size_t>(bins, 0)};
  const double w = h.width();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double v = x[i];
    if (!(v >= lo && v <= hi)) continue;
    auto k = static_cast<std::size_t>((v - lo) / w);
    if (k >= bins) k = bins - 1;
    ++h.counts[k];
  }
  return h;
}

Histogram histogram(const SampleView& x, std::size_t bins) {
  return histogram(x, bins, x.minCoeff(), x.maxCoeff());
}

// Greatest convex minorant / least concave majorant iteration of
// Hartigan & Hartigan (1985), AS 217, with the later corrections for the
// GCM distance term and the termination test. Arrays are 1-based.
DipResult dip_statistic(const SampleView& xs) {
  const auto n = static_cast<int>(xs.size());
  if (n < 4) throw std::invalid_argument("dip statistic needs n >= 4");
  for (int k = 1; k < n; ++k)
    if (!(xs[k] >= xs[k - 1]))
      throw std::invalid_argument("dip statistic needs ascending input");

  std::vector<double> x(n + 1);
  for (int i = 0; i < n; ++i) x[i + 1] = xs[i];
  std::vector<int> mn(n + 1), mj(n + 1), gcm(n + 1), lcm(n + 1);

  int low = 1, high = n;
  double dip = 1.0;  // works in units of 1/(2n) until the end
  DipResult out;
  out.n = static_cast<std::size_t>(n);

  if (x[n] == x[1]) {
    out.dip = dip / (2.0 * n);
    out.modal_low = 0;
    out.modal_high = static_cast<std::size_t>(n - 1);
    return out;
  }

  mn[1] = 1;
  for (int j = 2; j <= n; ++j) {
    mn[j] = j - 1;
    for (;;) {
      const int mnj = mn[j];
      const int mnmnj = mn[mnj];
      if (mnj == 1 || (x[j] - x[mnj]) * (mnj - mnmnj) < (x[mnj] - x[mnmnj]) * (j - mnj)) break;
      mn[j] = mnmnj;
    }
  }

  mj[n] = n;
  for (int k = n - 1; k >= 1; --k) {
    mj[k] = k + 1;
    for (;;) {
      const int mjk = mj[k];
      const int mjmjk = mj[mjk];
      if (mjk == n || (x[k] - x[mjk]) * (mjk - mjmjk) < (x[mjk] - x[mjmjk]) * (k - mjk)) break;
      mj[k] = mjmjk;
    }
  }

  for (;;) {
    gcm[1] = high;
    int i = 1;
    while (gcm[i] > low) {
      gcm[i + 1] = mn[gcm[i]];
      ++i;
    }
    const int l_gcm = i;
    int ig = l_gcm;
    int ix = ig - 1;

    lcm[1] = low;
    i = 1;
    while (lcm[i] < high) {
      lcm[i + 1] = mj[lcm[i]];
      ++i;
    }
    const int l_lcm = i;
    int ih = l_lcm;
    int iv = 2;

    double d = 0.0;
    if (l_gcm != 2 || l_lcm != 2) {
      do {
        const int gcmix = gcm[ix];
        const int lcmiv = lcm[iv];
        if (gcmix > lcmiv) {
          const int gcmi1 = gcm[ix + 1];
          const double dx = (lcmiv - gcmi1 + 1) -
                            (x[lcmiv] - x[gcmi1]) * (gcmix - gcmi1) / (x[gcmix] - x[gcmi1]);
          ++iv;
          if (dx >= d) {
            d = dx;
            ig = ix + 1;
            ih = iv - 1;
          }
        } else {
          const int lcmiv1 = lcm[iv - 1];
          const double dx = (x[gcmix] - x[lcmiv1]) * (lcmiv - lcmiv1) / (x[lcmiv] - x[lcmiv1]) -
                            (gcmix - lcmiv1 - 1);
          --ix;
          if (dx >= d) {
            d = dx;
            ig = ix + 1;
            ih = iv;
          }
        }
        if (ix < 1) ix = 1;
        if (iv > l_lcm) iv = l_lcm;
      } while (gcm[ix] != lcm[iv]);
    } else {
      d = 1.0;
    }

    if (d < dip) break;

    double dip_l = 0.0;
    for (int j = ig; j < l_gcm; ++j) {
      double max_t = 1.0;
      const int jb = gcm[j + 1], je = gcm[j];
      if (je - jb > 1 && x[je] != x[jb]) {
        const double c = (je - jb) / (x[je] - x[jb]);
        for (int jj = jb; jj <= je; ++jj) {
          const double t = (jj - jb + 1) - (x[jj] - x[jb]) * c;
          if (max_t < t) max_t = t;
        }
      }
      dip_l = std::max(dip_l, max_t);
    }

    double dip_u = 0.0;
    for (int j = ih; j < l_lcm; ++j) {
      double max_t = 1.0;
      const int jb = lcm[j], je = lcm[j + 1];
      if (je - jb > 1 && x[je] != x[jb]) {
        const double c = (je - jb) / (x[je] - x[jb]);
        for (int jj = jb; jj <= je; ++jj) {
          const double t = (x[jj] - x[jb]) * c - (jj - jb - 1);
          if (max_t < t) max_t = t;
        }
      }
      dip_u = std::max(dip_u, max_t);
    }

    dip = std::max(dip, std::max(dip_l, dip_u));

    // Without this test the iteration can cycle forever.
    if (low == gcm[ig] && high == lcm[ih]) break;
    low = gcm[ig];
    high = lcm[ih];
  }

  out.dip = dip / (2.0 * n);
  out.modal_low = static_cast<std::size_t>(low - 1);
  out.modal_high = static_cast<std::size_t>(high - 1);
  return out;
}

namespace {

// Sorted uniform order statistics via normalized exponential spacings.
void sorted_uniform(SequentialRng& gen, Eigen::VectorXd& out) {
  const Eigen::Index n = out.size();
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    total += -std::log(gen.uniform());
    out[i] = total;
  }
  total += -std::log(gen.uniform());
  out /= total;
}

struct NullKey {
  std::size_t n, n_boot;
  std::uint64_t seed;
  bool operator<(const NullKey& o) const {
    return std::tie(n, n_boot, seed) < std::tie(o.n, o.n_boot, o.seed);
  }
};

std::mutex null_mutex;
std::map<NullKey, std::vector<double>>& null_cache() {
  static std::map<NullKey, std::vector<double>> cache;
  return cache;
}

}  // namespace

const std::vector<double>& dip_null(std::size_t n, std::size_t n_boot, const CounterRng& rng) {
  if (n < 4) throw std::invalid_argument("dip statistic needs n >= 4");
  const NullKey key{n, n_boot, rng.seed()};
  {
    std::lock_guard<std::mutex> lock(null_mutex);
    auto it = null_cache().find(key);
    if (it != null_cache().end()) return it->second;
  }
  std::vector<double> dips(n_boot);
  Eigen::VectorXd u(static_cast<Eigen::Index>(n));
  const CounterRng base = rng.substream(0xD1F0ull);
  for (std::size_t b = 0; b < n_boot; ++b) {
    SequentialRng gen(base, b);
    sorted_uniform(gen, u);
    dips[b] = dip_statistic(u).dip;
  }
  std::sort(dips.begin(), dips.end());
  std::lock_guard<std::mutex> lock(null_mutex);
  return null_cache().emplace(key, std::move(dips)).first->second;
}

DipResult dip_test(const SampleView& samples, std::size_t n_boot, const CounterRng& rng) {
  if (n_boot < 100) throw std::invalid_argument("dip test needs n_boot >= 100");
  Eigen::VectorXd sorted = samples;
  std::sort(sorted.data(), sorted.data() + sorted.size());
  DipResult res = dip_statistic(sorted);
  const auto& null = dip_null(res.n, n_boot, rng);
  const auto above = null.end() - std::upper_bound(null.begin(), null.end(), res.dip);
  res.p_value = static_cast<double>(above) / static_cast<double>(n_boot);
  res.n_boot = n_boot;
  return res;
}

std::string to_string(Modality m) {
  switch (m) {
    case Modality::Unimodal: return "Unimodal";
    case Modality::Bimodal: return "Bimodal";
    case Modality::SpikedAtZero: return "SpikedAtZero";
  }
  return "Unknown";
}

Modality modality_from_string(const std::string& s) {
  if (s == "Unimodal") return Modality::Unimodal;
  if (s == "Bimodal") return Modality::Bimodal;
  if (s == "SpikedAtZero") return Modality::SpikedAtZero;
  throw std::invalid_argument("unknown modality '" + s + "'");
}

ModalityReport classify_modality(const SampleView& x, const ModalityThresholds& th,
                                 const CounterRng& rng) {
  if (x.size() < 100) throw std::invalid_argument("modality classification needs n >= 100");
  ModalityReport rep;
  Eigen::Index near_zero = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (std::abs(x[i]) < th.spike_delta) ++near_zero;
  rep.zero_mass_fraction = static_cast<double>(near_zero) / static_cast<double>(x.size());
  rep.dip = dip_test(x, th.n_boot, rng);

  if (rep.zero_mass_fraction > th.spike_fraction) {
    rep.cls = Modality::SpikedAtZero;
  } else if (*rep.dip.p_value < th.bimodal_p) {
    rep.cls = Modality::Bimodal;
  } else {
    rep.cls = Modality::Unimodal;
  }

  if (rep.cls == Modality::Bimodal) {
    std::vector<double> neg, pos;
    for (Eigen::Index i = 0; i < x.size(); ++i) (x[i] < 0.0 ? neg : pos).push_back(x[i]);
    if (!neg.empty()) {
      const Eigen::Map<const Eigen::VectorXd> v(neg.data(), static_cast<Eigen::Index>(neg.size()));
      const auto h = histogram(v, th.bins, v.minCoeff(), 0.0);
      rep.modes.push_back(h.center(h.argmax()));
    }
    if (!pos.empty()) {
      const Eigen::Map<const Eigen::VectorXd> v(pos.data(), static_cast<Eigen::Index>(pos.size()));
      const auto h = histogram(v, th.bins, 0.0, v.maxCoeff());
      rep.modes.push_back(h.center(h.argmax()));
    }
  } else {
    const auto h = histogram(x, th.bins);
    rep.modes.push_back(h.center(h.argmax()));
  }
  return rep;
}

double ks_distance(const SampleView& a, const SampleView& b) {
  std::vector<double> x(a.data(), a.data() + a.size()), y(b.data(), b.data() + b.size());
  if (x.empty() || y.empty()) throw std::invalid_argument("ks distance needs non-empty samples");
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return d;
}

double histogram_distance(const SampleView& a, const SampleView& b, std::size_t bins) {
  if (a.size() == 0 || b.size() == 0) throw std::invalid_argument("histogram distance needs non-empty samples");
  if (bins < 1) throw std::invalid_argument("histogram distance needs bins >= 1");
  const double lo = std::min(a.minCoeff(), b.minCoeff());
  const double hi = std::max(a.maxCoeff(), b.maxCoeff());
  if (!(hi > lo)) return 0.0;
  const Histogram ha = histogram(a, bins, lo, hi), hb = histogram(b, bins, lo, hi);
  const double na = static_cast<double>(ha.total()), nb = static_cast<double>(hb.total());
  double ca = 0.0, cb = 0.0, d = 0.0;
  for (std::size_t k = 0; k < bins; ++k) {
    ca += static_cast<double>(ha.counts[k]) / na;
    cb += static_cast<double>(hb.counts[k]) / nb;
    d = std::max(d, std::abs(ca - cb));
  }
  return d;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("slope needs two equal-length series of length >= 2");
  double mx = 0.0, my = 0.0;
  const double k = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::domain_error("log-log slope needs positive data");
    mx += std::log(x[i]) / k;
    my += std::log(y[i]) / k;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of an empty sample");
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2) return *mid;
  return 0.5 * (*mid + *std::max_element(v.begin(), mid));
}

}  // namespace adamlab
