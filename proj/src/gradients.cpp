#include "adamlab/gradients.hpp"

#include "adamlab/errors.hpp"

#include <cmath>
#include <stdexcept>

namespace adamlab {

namespace {

constexpr int kMaxBatch = 1 << 20;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Counter layout: (coordinate, step << 20 | draw). Step 0 is never sampled,
// so (i, 0) addresses the frozen component.
std::uint64_t lane(std::uint64_t t, int draw) {
  return (t << 20) | static_cast<std::uint64_t>(draw);
}

double frozen_part(const LeafModel& leaf, const CounterRng& rng, std::uint64_t i) {
  return std::visit(overloaded{
                        [](const IidSign&) { return 0.0; },
                        [&](const CorrelatedSign& m) { return m.rho * rng.sign(i, 0); },
                        [](const IidGaussian&) { return 0.0; },
                        [&](const CorrelatedGaussian& m) { return m.rho * rng.normal(i, 0); },
                        [](const Constant& m) { return m.g0; },
                    },
                    leaf);
}

double fresh_part(const LeafModel& leaf, const CounterRng& rng, std::uint64_t i,
                  std::uint64_t t, int batch) {
  auto mean_of = [&](auto draw) {
    double s = 0.0;
    for (int d = 0; d < batch; ++d) s += draw(lane(t, d));
    return s / batch;
  };
  return std::visit(
      overloaded{
          [&](const IidSign&) { return mean_of([&](std::uint64_t b) { return rng.sign(i, b); }); },
          [&](const CorrelatedSign&) {
            return mean_of([&](std::uint64_t b) { return rng.sign(i, b); });
          },
          [&](const IidGaussian& m) {
            return m.sigma * mean_of([&](std::uint64_t b) { return rng.normal(i, b); });
          },
          [&](const CorrelatedGaussian& m) {
            return m.sigma * mean_of([&](std::uint64_t b) { return rng.normal(i, b); });
          },
          [](const Constant&) { return 0.0; },
      },
      leaf);
}

void validate_leaf(const LeafModel& leaf) {
  std::visit(overloaded{
                 [](const IidSign&) {},
                 [](const CorrelatedSign& m) {
                   if (!(m.rho >= 0.0)) throw std::invalid_argument("rho must be >= 0");
                 },
                 [](const IidGaussian& m) {
                   if (!(m.sigma > 0.0)) throw std::invalid_argument("sigma must be > 0");
                 },
                 [](const CorrelatedGaussian& m) {
                   if (!(m.rho >= 0.0)) throw std::invalid_argument("rho must be >= 0");
                   if (!(m.sigma > 0.0)) throw std::invalid_argument("sigma must be > 0");
                 },
                 [](const Constant& m) {
                   if (!std::isfinite(m.g0)) throw std::invalid_argument("g0 must be finite");
                 },
             },
             leaf);
}

LeafModel to_leaf(const ModelVariant& v) {
  return std::visit(overloaded{
                        [](const QuadraticExact&) -> LeafModel {
                          throw UnsupportedError("QuadraticExact is not a leaf model");
                        },
                        [](const Layered&) -> LeafModel {
                          throw UnsupportedError("Layered is not a leaf model");
                        },
                        [](const auto& leaf) -> LeafModel { return leaf; },
                    },
                    v);
}

void fill_leaf(const LeafModel& leaf, const CounterRng& rng, std::uint64_t t, int batch,
               Eigen::Index begin, Eigen::Index end, double scale, double noise_scale,
               Eigen::Ref<Eigen::VectorXd> out) {
  for (Eigen::Index i = begin; i < end; ++i) {
    const auto ui = static_cast<std::uint64_t>(i);
    out[i] = scale * (frozen_part(leaf, rng, ui) + noise_scale * fresh_part(leaf, rng, ui, t, batch));
  }
}

}  // namespace

double ScaleSchedule::operator()(std::uint64_t t) const {
  if (t <= start || stop <= start) return t <= start ? from : to;
  if (t >= stop) return to;
  const double frac = static_cast<double>(t - start) / static_cast<double>(stop - start);
  return std::exp(std::log(from) + frac * (std::log(to) - std::log(from)));
}

void ScaleSchedule::validate() const {
  if (!(from > 0.0) || !(to > 0.0) || !std::isfinite(from) || !std::isfinite(to))
    throw std::invalid_argument("scale schedule endpoints must be positive and finite");
}

GradientModel::GradientModel(Eigen::Index n, ModelVariant variant, int batch_size,
                             std::vector<RareEvent> rare_events, GroupPartition partition)
    : n_(n), variant_(std::move(variant)), batch_(batch_size), events_(std::move(rare_events)) {
  if (n_ < 1) throw std::invalid_argument("gradient model needs n >= 1");
  if (batch_ < 1 || batch_ >= kMaxBatch)
    throw std::invalid_argument("batch size must be in [1, 2^20)");

  if (const auto* layered = std::get_if<Layered>(&variant_)) {
    layered->partition.validate(n_);
    if (layered->layers.size() != layered->partition.size())
      throw std::invalid_argument("layered model needs exactly one layer per group");
    for (const auto& layer : layered->layers) {
      if (!layered->partition.contains(layer.group))
        throw std::invalid_argument("layer refers to unknown group '" + layer.group + "'");
      validate_leaf(layer.model);
      layer.scale.validate();
      layer.noise_scale.validate();
    }
    partition_ = layered->partition;
  } else if (const auto* quad = std::get_if<QuadraticExact>(&variant_)) {
    if (!quad->objective) throw std::invalid_argument("QuadraticExact without objective");
    if (quad->objective->size() != n_)
      throw std::invalid_argument("objective dimension does not match model size");
    if (!(quad->noise >= 0.0)) throw std::invalid_argument("noise must be >= 0");
    partition_ = partition.size() ? std::move(partition) : GroupPartition::single(n_);
  } else {
    validate_leaf(to_leaf(variant_));
    partition_ = partition.size() ? std::move(partition) : GroupPartition::single(n_);
  }
  partition_.validate(n_);

  for (const auto& e : events_) {
    if (!partition_.contains(e.group))
      throw std::invalid_argument("rare event refers to unknown group '" + e.group + "'");
    if (e.step < 1) throw std::invalid_argument("rare event step must be >= 1");
    if (!(e.multiplier > 0.0) || !std::isfinite(e.multiplier))
      throw std::invalid_argument("rare event multiplier must be positive");
  }
}

double GradientModel::event_multiplier(std::size_t group, std::uint64_t t) const {
  double m = 1.0;
  const auto& label = partition_[group].label;
  for (const auto& e : events_)
    if (e.step == t && e.group == label) m *= e.multiplier;
  return m;
}

double GradientModel::group_factor(std::size_t group, std::uint64_t t) const {
  double s = event_multiplier(group, t);
  if (const auto* layered = std::get_if<Layered>(&variant_)) {
    const auto& label = partition_[group].label;
    for (const auto& layer : layered->layers)
      if (layer.group == label) s *= layer.scale(t);
  }
  return s;
}

void sample_into(const GradientModel& model, std::uint64_t t, const CounterRng& rng,
                 Eigen::Ref<Eigen::VectorXd> out) {
  if (t < 1) throw std::invalid_argument("gradient steps start at t = 1");
  if (out.size() != model.size()) throw std::invalid_argument("output length mismatch");
  const auto& part = model.partition();

  if (const auto* layered = std::get_if<Layered>(&model.variant())) {
    for (const auto& layer : layered->layers) {
      const std::size_t gi = part.index_of(layer.group);
      const Group& g = part[gi];
      fill_leaf(layer.model, rng, t, model.batch_size(), g.start, g.end(),
                model.group_factor(gi, t), layer.noise_scale(t), out);
    }
    return;
  }
  if (std::holds_alternative<QuadraticExact>(model.variant()))
    throw UnsupportedError("QuadraticExact needs parameters; use gradient()");

  const LeafModel leaf = to_leaf(model.variant());
  fill_leaf(leaf, rng, t, model.batch_size(), 0, model.size(), 1.0, 1.0, out);
  for (std::size_t gi = 0; gi < part.size(); ++gi) {
    const double m = model.event_multiplier(gi, t);
    if (m != 1.0) segment(out, part[gi]) *= m;
  }
}

Eigen::VectorXd sample(const GradientModel& model, std::uint64_t t, const CounterRng& rng) {
  Eigen::VectorXd g(model.size());
  sample_into(model, t, rng, g);
  return g;
}

Eigen::VectorXd gradient(const GradientModel& model, std::uint64_t t, const CounterRng& rng,
                         const Eigen::Ref<const Eigen::VectorXd>& theta) {
  const auto* quad = std::get_if<QuadraticExact>(&model.variant());
  if (!quad) return sample(model, t, rng);
  if (t < 1) throw std::invalid_argument("gradient steps start at t = 1");
  Eigen::VectorXd g = quad->objective->gradient(theta);
  if (quad->noise > 0.0) {
    const LeafModel noise = IidSign{};
    Eigen::VectorXd z(model.size());
    fill_leaf(noise, rng, t, model.batch_size(), 0, model.size(), quad->noise, 1.0, z);
    g += z;
  }
  const auto& part = model.partition();
  for (std::size_t gi = 0; gi < part.size(); ++gi) {
    const double m = model.event_multiplier(gi, t);
    if (m != 1.0) segment(g, part[gi]) *= m;
  }
  return g;
}

MomentSpec expected_moments(const LeafModel& leaf, int batch_size) {
  const double b = batch_size;
  // (mean, frozen variance, fresh variance per draw)
  struct Parts {
    double mean, frozen, fresh;
  };
  const Parts p = std::visit(overloaded{
                                 [](const IidSign&) { return Parts{0.0, 0.0, 1.0}; },
                                 [](const CorrelatedSign& m) { return Parts{0.0, m.rho * m.rho, 1.0}; },
                                 [](const IidGaussian& m) { return Parts{0.0, 0.0, m.sigma * m.sigma}; },
                                 [](const CorrelatedGaussian& m) {
                                   return Parts{0.0, m.rho * m.rho, m.sigma * m.sigma};
                                 },
                                 [](const Constant& m) { return Parts{m.g0, 0.0, 0.0}; },
                             },
                             leaf);
  const double var = p.frozen + p.fresh / b;
  const double rho = var > 0.0 ? p.frozen / var : 1.0;
  return {p.mean, var, rho};
}

MomentSpec expected_moments(const GradientModel& model, std::uint64_t t) {
  if (std::holds_alternative<QuadraticExact>(model.variant()))
    throw UnsupportedError("QuadraticExact has no closed-form moments");
  const auto* layered = std::get_if<Layered>(&model.variant());
  if (!layered) return expected_moments(to_leaf(model.variant()), model.batch_size());

  // Mixture over groups, weighted by group size, with step-t scales.
  double mean = 0.0, lag = 0.0, second = 0.0;
  const double n = static_cast<double>(model.size());
  const auto& part = model.partition();
  for (const auto& layer : layered->layers) {
    const std::size_t gi = part.index_of(layer.group);
    const double w = static_cast<double>(part[gi].length) / n;
    const double s = model.group_factor(gi, t);
    const double ns = layer.noise_scale(t);
    const MomentSpec m = expected_moments(layer.model, model.batch_size());
    const double frozen = m.time_autocorrelation * m.variance;
    const double fresh = (m.variance - frozen) * ns * ns;
    mean += w * s * m.mean;
    lag += w * s * s * (m.mean * m.mean + frozen);
    second += w * s * s * (m.mean * m.mean + frozen + fresh);
  }
  const double var = second - mean * mean;
  return {mean, var, var > 0.0 ? (lag - mean * mean) / var : 1.0};
}

std::string variant_name(const ModelVariant& v) {
  return std::visit(overloaded{
                        [](const IidSign&) { return std::string("IidSign"); },
                        [](const CorrelatedSign&) { return std::string("CorrelatedSign"); },
                        [](const IidGaussian&) { return std::string("IidGaussian"); },
                        [](const CorrelatedGaussian&) { return std::string("CorrelatedGaussian"); },
                        [](const Constant&) { return std::string("Constant"); },
                        [](const QuadraticExact&) { return std::string("QuadraticExact"); },
                        [](const Layered&) { return std::string("Layered"); },
                    },
                    v);
}

}  // namespace adamlab
