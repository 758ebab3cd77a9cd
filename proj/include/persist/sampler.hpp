#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "persist/rng.hpp"
#include "persist/vec.hpp"

namespace persist {

enum class Mode { multivariate, one_dimensional, nonstandard_product };
enum class AngularKind { uniform, von_mises_fisher, piecewise };

struct AngularSpec {
  AngularKind kind = AngularKind::uniform;
  Vec mean_direction;             // von Mises-Fisher
  double concentration = 0.0;     // von Mises-Fisher
  std::vector<double> densities;  // piecewise: equal-width angle bins over [0, 2pi), d = 2 only
  bool atomic = false;            // declared atomic angular law; only the exponent command reads it
};

struct TailBalance {
  double p_minus = 0.0;
  double alpha_minus = 0.0;  // 0 means "same as alpha"
};

struct RVModel {
  Mode mode = Mode::multivariate;
  int dimension = 1;
  double alpha = 2.0;
  double radial_scale = 1.0;
  double bulk_fraction = 0.0;
  AngularSpec angular;
  TailBalance tail;
  Vec centering_shift;
  std::vector<RVModel> components;  // nonstandard_product: one 1-D model per coordinate
};

RVModel one_dimensional(double alpha, double radial_scale = 1.0, double p_minus = 0.0,
                        double alpha_minus = 0.0, double bulk_fraction = 0.0);
RVModel multivariate(int dimension, double alpha, AngularSpec angular = {}, double radial_scale = 1.0,
                     double bulk_fraction = 0.0);
RVModel nonstandard(std::vector<RVModel> components);

// Throws ConfigError on invalid parameters.
void validate(const RVModel& model);

// Probability weight of the negative half-line in the 1-D tail mixture.
double left_weight(const RVModel& model);

// Mean of the uncentred law W. Throws DomainError when alpha <= 1.
Vec calibrate_centering(const RVModel& model);

// Validates and stores the centring shift.
RVModel centered(RVModel model);

std::uint64_t model_digest(const RVModel& model);

class Sampler {
 public:
  explicit Sampler(RVModel model);

  const RVModel& model() const { return model_; }
  int dimension() const { return dim_; }

  void sample(Rng& rng, std::span<double> out) const;
  double sample_1d(Rng& rng) const;

 private:
  static double draw_1d(const RVModel& m, Rng& rng);
  void draw_direction(Rng& rng, std::span<double> out) const;

  RVModel model_;
  int dim_;
  std::vector<Vec> vmf_frame_;
  double vmf_b_ = 0.0, vmf_x0_ = 0.0, vmf_c_ = 0.0;
  std::vector<double> piecewise_cdf_;
  double piecewise_max_ = 0.0;
};

Vec sample_step(const Sampler& sampler, Rng& rng);
double sample_step_1d(const Sampler& sampler, Rng& rng);
// Independent coordinates, one 1-D model per coordinate.
Vec sample_nonstandard(const std::vector<RVModel>& models, Rng& rng);

struct SampleBatch {
  std::vector<Vec> steps;
  std::uint64_t seed = 0;
  std::uint64_t model_digest = 0;
};

SampleBatch sample_batch(const Sampler& sampler, std::uint64_t seed, std::size_t count);

// Analytic tail probabilities of the radial part, P(R > t), and the 1-D right tail P(X - shift > t)
// for t beyond the bulk support.
double radial_tail(const RVModel& model, double t);
double right_tail_1d(const RVModel& model, double t);

// Second moment of the 1-D law (after centring). Infinite when alpha <= 2.
double variance_1d(const RVModel& model);

struct HillResult {
  double alpha = 0.0;
  bool unreliable = false;  // k < 30
};

// Hill estimator over the k largest of `samples`; non-positive samples are ignored.
HillResult hill_tail_index(std::span<const double> samples, std::size_t k);

// Gamma(shape, 1) by Marsaglia-Tsang.
double gamma_variate(Rng& rng, double shape);
double beta_variate(Rng& rng, double a, double b);

// Mean resultant length of the von Mises-Fisher law on S^{d-1}.
double vmf_mean_resultant(int dimension, double kappa);

}  // namespace persist
