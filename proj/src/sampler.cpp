#include "persist/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

#include "persist/error.hpp"

namespace persist {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double alpha_left(const RVModel& m) { return m.tail.alpha_minus > 0.0 ? m.tail.alpha_minus : m.alpha; }

void uniform_direction(Rng& rng, std::span<double> out) {
  if (out.size() == 1) {
    out[0] = rng.uniform() < 0.5 ? -1.0 : 1.0;
    return;
  }
  double nrm = 0.0;
  do {
    for (double& v : out) v = rng.normal();
    nrm = norm(out);
  } while (nrm == 0.0);
  for (double& v : out) v /= nrm;
}

void fnv(std::uint64_t& h, const std::string& s) {
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001B3ull;
  }
}

void serialize(const RVModel& m, std::string& out) {
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g,", v);
    out += buf;
  };
  out += "mode" + std::to_string(static_cast<int>(m.mode)) + ";d" + std::to_string(m.dimension) + ";";
  num(m.alpha);
  num(m.radial_scale);
  num(m.bulk_fraction);
  out += "ang" + std::to_string(static_cast<int>(m.angular.kind)) + ":";
  for (double v : m.angular.mean_direction) num(v);
  num(m.angular.concentration);
  for (double v : m.angular.densities) num(v);
  out += "tail:";
  num(m.tail.p_minus);
  num(m.tail.alpha_minus);
  out += "shift:";
  for (double v : m.centering_shift) num(v);
  for (const auto& c : m.components) {
    out += "[";
    serialize(c, out);
    out += "]";
  }
}

}  // namespace

std::vector<Vec> orthonormal_frame(std::span<const double> first) {
  const std::size_t d = first.size();
  std::vector<Vec> frame;
  frame.push_back(normalized(first));
  for (std::size_t axis = 0; axis < d && frame.size() < d; ++axis) {
    Vec v(d, 0.0);
    v[axis] = 1.0;
    for (const Vec& e : frame) {
      const double p = dot(v, e);
      for (std::size_t j = 0; j < d; ++j) v[j] -= p * e[j];
    }
    const double n = norm(v);
    if (n > 1e-8) frame.push_back(scaled(v, 1.0 / n));
  }
  return frame;
}

RVModel one_dimensional(double alpha, double radial_scale, double p_minus, double alpha_minus,
                        double bulk_fraction) {
  RVModel m;
  m.mode = Mode::one_dimensional;
  m.dimension = 1;
  m.alpha = alpha;
  m.radial_scale = radial_scale;
  m.bulk_fraction = bulk_fraction;
  m.tail = {p_minus, alpha_minus};
  m.centering_shift = {0.0};
  return m;
}

RVModel multivariate(int dimension, double alpha, AngularSpec angular, double radial_scale,
                     double bulk_fraction) {
  RVModel m;
  m.mode = Mode::multivariate;
  m.dimension = dimension;
  m.alpha = alpha;
  m.radial_scale = radial_scale;
  m.bulk_fraction = bulk_fraction;
  m.angular = std::move(angular);
  m.centering_shift = Vec(static_cast<std::size_t>(dimension), 0.0);
  return m;
}

RVModel nonstandard(std::vector<RVModel> components) {
  RVModel m;
  m.mode = Mode::nonstandard_product;
  m.dimension = static_cast<int>(components.size());
  m.alpha = components.empty() ? 0.0 : components.front().alpha;
  for (const auto& c : components) m.alpha = std::min(m.alpha, c.alpha);
  m.components = std::move(components);
  m.centering_shift = Vec(static_cast<std::size_t>(m.dimension), 0.0);
  return m;
}

void validate(const RVModel& m) {
  if (m.mode == Mode::nonstandard_product) {
    if (m.components.empty()) throw ConfigError("nonstandard model needs at least one component");
    if (static_cast<int>(m.components.size()) != m.dimension)
      throw ConfigError("nonstandard model: dimension must equal the number of components");
    for (const auto& c : m.components) {
      if (c.mode != Mode::one_dimensional) throw ConfigError("nonstandard components must be one-dimensional");
      validate(c);
    }
    return;
  }
  if (m.dimension < 1) throw ConfigError("dimension must be positive");
  if (!(m.alpha > 1.0)) throw ConfigError("alpha must exceed 1");
  if (!(m.radial_scale > 0.0)) throw ConfigError("radial_scale must be positive");
  if (!(m.bulk_fraction >= 0.0 && m.bulk_fraction < 1.0))
    throw ConfigError("bulk_fraction must lie in [0, 1); a purely bounded law has no regularly varying tail");
  if (!m.centering_shift.empty() && static_cast<int>(m.centering_shift.size()) != m.dimension)
    throw ConfigError("centering_shift has the wrong length");
  if (m.mode == Mode::one_dimensional) {
    if (m.dimension != 1) throw ConfigError("one-dimensional mode requires dimension 1");
    if (m.tail.p_minus < 0.0) throw ConfigError("tail_balance.p_minus must be non-negative");
    if (m.tail.alpha_minus != 0.0 && m.tail.alpha_minus < m.alpha)
      throw ConfigError("tail_balance.alpha_minus must be >= alpha (left tail no heavier than right)");
    return;
  }
  const auto& a = m.angular;
  switch (a.kind) {
    case AngularKind::uniform:
      break;
    case AngularKind::von_mises_fisher:
      if (m.dimension < 2) throw ConfigError("von Mises-Fisher angular law needs dimension >= 2");
      if (static_cast<int>(a.mean_direction.size()) != m.dimension || norm(a.mean_direction) == 0.0)
        throw ConfigError("von Mises-Fisher mean_direction must be a non-zero d-vector");
      if (!(a.concentration >= 0.0)) throw ConfigError("von Mises-Fisher concentration must be >= 0");
      break;
    case AngularKind::piecewise:
      if (m.dimension != 2) throw ConfigError("piecewise angular density is supported for dimension 2 only");
      if (a.densities.empty()) throw ConfigError("piecewise angular density needs at least one bin");
      for (double v : a.densities)
        if (!(v > 0.0)) throw ConfigError("angular density must be strictly positive on the sphere");
      break;
  }
}

double left_weight(const RVModel& m) { return m.tail.p_minus / (1.0 + m.tail.p_minus); }

double vmf_mean_resultant(int d, double kappa) {
  if (kappa == 0.0) return 0.0;
  const double nu = 0.5 * d;
  if (kappa > 500.0) {
    const double dm1 = d - 1.0;
    return 1.0 - dm1 / (2.0 * kappa) + dm1 * (d - 3.0) / (8.0 * kappa * kappa);
  }
  return std::cyl_bessel_i(nu, kappa) / std::cyl_bessel_i(nu - 1.0, kappa);
}

Vec calibrate_centering(const RVModel& m) {
  if (m.mode == Mode::nonstandard_product) {
    Vec out;
    for (const auto& c : m.components) out.push_back(calibrate_centering(c)[0]);
    return out;
  }
  if (!(m.alpha > 1.0)) throw DomainError("mean undefined for alpha <= 1");
  const double xm = m.radial_scale;
  const double tail = 1.0 - m.bulk_fraction;
  if (m.mode == Mode::one_dimensional) {
    const double al = alpha_left(m);
    if (!(al > 1.0)) throw DomainError("mean undefined for alpha_minus <= 1");
    const double pw = left_weight(m);
    const double right = m.alpha * xm / (m.alpha - 1.0);
    const double left = al * xm / (al - 1.0);
    return {tail * ((1.0 - pw) * right - pw * left)};
  }
  const double er = m.alpha * xm / (m.alpha - 1.0);
  const std::size_t d = static_cast<std::size_t>(m.dimension);
  Vec theta(d, 0.0);
  switch (m.angular.kind) {
    case AngularKind::uniform:
      break;
    case AngularKind::von_mises_fisher:
      theta = scaled(normalized(m.angular.mean_direction),
                     vmf_mean_resultant(m.dimension, m.angular.concentration));
      break;
    case AngularKind::piecewise: {
      const auto& f = m.angular.densities;
      const double width = kTwoPi / static_cast<double>(f.size());
      double total = 0.0;
      for (double v : f) total += v;
      for (std::size_t b = 0; b < f.size(); ++b) {
        const double t0 = width * static_cast<double>(b), t1 = t0 + width;
        const double p = f[b] / total;
        theta[0] += p * (std::sin(t1) - std::sin(t0)) / width;
        theta[1] += p * (std::cos(t0) - std::cos(t1)) / width;
      }
      break;
    }
  }
  return scaled(theta, tail * er);
}

RVModel centered(RVModel m) {
  validate(m);
  if (m.mode == Mode::nonstandard_product)
    for (auto& c : m.components) c = centered(std::move(c));
  m.centering_shift = calibrate_centering(m);
  return m;
}

std::uint64_t model_digest(const RVModel& m) {
  std::string s;
  serialize(m, s);
  std::uint64_t h = 0xCBF29CE484222325ull;
  fnv(h, s);
  return h;
}

Sampler::Sampler(RVModel model) : model_(std::move(model)), dim_(model_.dimension) {
  validate(model_);
  if (model_.centering_shift.empty()) model_.centering_shift.assign(static_cast<std::size_t>(dim_), 0.0);
  const auto& a = model_.angular;
  if (model_.mode == Mode::multivariate && a.kind == AngularKind::von_mises_fisher) {
    vmf_frame_ = orthonormal_frame(a.mean_direction);
    const double k = a.concentration, dm1 = dim_ - 1.0;
    vmf_b_ = dm1 / (2.0 * k + std::sqrt(4.0 * k * k + dm1 * dm1));
    vmf_x0_ = (1.0 - vmf_b_) / (1.0 + vmf_b_);
    vmf_c_ = k * vmf_x0_ + dm1 * std::log(1.0 - vmf_x0_ * vmf_x0_);
  }
  if (model_.mode == Mode::multivariate && a.kind == AngularKind::piecewise)
    piecewise_max_ = *std::max_element(a.densities.begin(), a.densities.end());
}

double Sampler::draw_1d(const RVModel& m, Rng& rng) {
  const double xm = m.radial_scale;
  double w;
  if (m.bulk_fraction > 0.0 && rng.uniform() < m.bulk_fraction) {
    w = (2.0 * rng.uniform() - 1.0) * xm;
  } else if (m.tail.p_minus > 0.0 && rng.uniform() < left_weight(m)) {
    w = -xm * std::pow(rng.uniform(), -1.0 / alpha_left(m));
  } else {
    w = xm * std::pow(rng.uniform(), -1.0 / m.alpha);
  }
  return w - (m.centering_shift.empty() ? 0.0 : m.centering_shift[0]);
}

void Sampler::draw_direction(Rng& rng, std::span<double> out) const {
  const auto& a = model_.angular;
  switch (a.kind) {
    case AngularKind::uniform:
      uniform_direction(rng, out);
      return;
    case AngularKind::piecewise: {
      const double width = kTwoPi / static_cast<double>(a.densities.size());
      for (;;) {
        const double t = kTwoPi * rng.uniform();
        auto bin = static_cast<std::size_t>(t / width);
        if (bin >= a.densities.size()) bin = a.densities.size() - 1;
        if (rng.uniform() * piecewise_max_ <= a.densities[bin]) {
          out[0] = std::cos(t);
          out[1] = std::sin(t);
          return;
        }
      }
    }
    case AngularKind::von_mises_fisher: {
      const double dm1 = dim_ - 1.0, k = a.concentration, b = vmf_b_;
      double w;
      for (;;) {
        const double z = beta_variate(rng, 0.5 * dm1, 0.5 * dm1);
        w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
        const double u = rng.uniform();
        if (k * w + dm1 * std::log(1.0 - vmf_x0_ * w) - vmf_c_ >= std::log(u)) break;
      }
      Vec v(static_cast<std::size_t>(dim_ - 1));
      uniform_direction(rng, v);
      const double s = std::sqrt(std::max(0.0, 1.0 - w * w));
      for (int j = 0; j < dim_; ++j) {
        double x = w * vmf_frame_[0][static_cast<std::size_t>(j)];
        for (int i = 1; i < dim_; ++i)
          x += s * v[static_cast<std::size_t>(i - 1)] * vmf_frame_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        out[static_cast<std::size_t>(j)] = x;
      }
      return;
    }
  }
}

void Sampler::sample(Rng& rng, std::span<double> out) const {
  switch (model_.mode) {
    case Mode::one_dimensional:
      out[0] = draw_1d(model_, rng);
      return;
    case Mode::nonstandard_product:
      for (std::size_t j = 0; j < model_.components.size(); ++j) out[j] = draw_1d(model_.components[j], rng);
      return;
    case Mode::multivariate:
      break;
  }
  const double xm = model_.radial_scale;
  if (model_.bulk_fraction > 0.0 && rng.uniform() < model_.bulk_fraction) {
    uniform_direction(rng, out);
    const double rad = xm * std::pow(rng.uniform(), 1.0 / dim_);
    for (double& v : out) v *= rad;
  } else {
    draw_direction(rng, out);
    const double rad = xm * std::pow(rng.uniform(), -1.0 / model_.alpha);
    for (double& v : out) v *= rad;
  }
  for (std::size_t j = 0; j < out.size(); ++j) out[j] -= model_.centering_shift[j];
}

double Sampler::sample_1d(Rng& rng) const {
  if (model_.mode != Mode::one_dimensional) throw ConfigError("sample_step_1d requires one-dimensional mode");
  return draw_1d(model_, rng);
}

Vec sample_step(const Sampler& sampler, Rng& rng) {
  Vec out(static_cast<std::size_t>(sampler.dimension()));
  sampler.sample(rng, out);
  return out;
}

double sample_step_1d(const Sampler& sampler, Rng& rng) { return sampler.sample_1d(rng); }

Vec sample_nonstandard(const std::vector<RVModel>& models, Rng& rng) {
  if (models.empty()) throw ConfigError("nonstandard sampling needs at least one component");
  Sampler s(nonstandard(models));
  return sample_step(s, rng);
}

SampleBatch sample_batch(const Sampler& sampler, std::uint64_t seed, std::size_t count) {
  SampleBatch batch;
  batch.seed = seed;
  batch.model_digest = model_digest(sampler.model());
  Rng rng(seed, 0, stream_id(StreamPurpose::sample_batch));
  batch.steps.reserve(count);
  for (std::size_t i = 0; i < count; ++i) batch.steps.push_back(sample_step(sampler, rng));
  return batch;
}

double radial_tail(const RVModel& m, double t) {
  const double xm = m.radial_scale, tail = 1.0 - m.bulk_fraction;
  if (t >= xm) return tail * std::pow(t / xm, -m.alpha);
  if (t <= 0.0) return 1.0;
  return tail + m.bulk_fraction * (1.0 - std::pow(t / xm, m.dimension));
}

double right_tail_1d(const RVModel& m, double t) {
  const double xm = m.radial_scale;
  const double y = t + (m.centering_shift.empty() ? 0.0 : m.centering_shift[0]);
  const double bulk = y < -xm ? 1.0 : (y > xm ? 0.0 : (xm - y) / (2.0 * xm));
  const double pos = y < xm ? 1.0 : std::pow(y / xm, -m.alpha);
  const double neg = y >= -xm ? 0.0 : 1.0 - std::pow(-y / xm, -alpha_left(m));
  const double pw = left_weight(m);
  return m.bulk_fraction * bulk + (1.0 - m.bulk_fraction) * ((1.0 - pw) * pos + pw * neg);
}

double variance_1d(const RVModel& m) {
  const double xm = m.radial_scale, al = alpha_left(m), pw = left_weight(m);
  if (m.alpha <= 2.0 || (pw > 0.0 && al <= 2.0)) return INFINITY;
  const double second = m.bulk_fraction * xm * xm / 3.0 +
                        (1.0 - m.bulk_fraction) * ((1.0 - pw) * m.alpha * xm * xm / (m.alpha - 2.0) +
                                                   (pw > 0.0 ? pw * al * xm * xm / (al - 2.0) : 0.0));
  const double mean = calibrate_centering(m)[0];
  return second - mean * mean;
}

HillResult hill_tail_index(std::span<const double> samples, std::size_t k) {
  std::vector<double> pos;
  pos.reserve(samples.size());
  for (double v : samples)
    if (v > 0.0) pos.push_back(v);
  if (k == 0 || k >= pos.size()) throw DomainError("Hill estimator needs 0 < k < number of positive samples");
  std::nth_element(pos.begin(), pos.begin() + static_cast<std::ptrdiff_t>(k), pos.end(), std::greater<>());
  const double threshold = std::log(pos[k]);
  double h = 0.0;
  for (std::size_t i = 0; i < k; ++i) h += std::log(pos[i]) - threshold;
  h /= static_cast<double>(k);
  if (!(h > 0.0)) throw DomainError("Hill estimator: zero log-spacings among the top order statistics");
  return {1.0 / h, k < 30};
}

double gamma_variate(Rng& rng, double shape) {
  if (shape < 1.0) return gamma_variate(rng, shape + 1.0) * std::pow(rng.uniform(), 1.0 / shape);
  const double d = shape - 1.0 / 3.0, c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double beta_variate(Rng& rng, double a, double b) {
  const double x = gamma_variate(rng, a);
  const double y = gamma_variate(rng, b);
  return x / (x + y);
}

}  // namespace persist
