#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nvh/dataset.hpp"
#include "nvh/sampler.hpp"
#include "nvh/surrogate.hpp"

namespace nvh {

struct NormalPrior {
  double mean = 0.0;
  double sd = 1.0;
};

struct InvGamma {
  double shape = 2.0;
  double rate = 2.0;
};

/// Prior configuration. Location-type priors act on the model's internal
/// standardized scale (SPL standardized to zero mean / unit sd after removing
/// the physical speed term, transformed frequency standardized likewise).
struct PriorSpec {
  std::vector<NormalPrior> poly;         // BM1, one per polynomial coefficient
  NormalPrior intercept{0.0, 10.0};      // BM2
  std::vector<NormalPrior> amp;          // BM2
  std::vector<NormalPrior> loc;          // BM2, on the constrained location
  double sigma_c = 1.0;                  // sd of width_k | mu_c
  NormalPrior mu_c_hyper{1.0, 1.0};      // (mu_cc, sigma_cc)
  InvGamma variance{2.0, 2.0};           // all variance parameters
};

/// Weakly-informative defaults derived from the dataset: N(0, 10) location
/// priors on the standardized scale, Gaussian locations centered on the even
/// spread used for NLS initialization, InvGamma(2, 2) variances.
PriorSpec default_priors(const Dataset& data, const SurrogateSpec& spec);

/// log/exp pair used for every positive parameter, with log-Jacobian u.
inline double to_unconstrained(double positive) {
  if (!(positive > 0.0))
    throw domain_error("to_unconstrained: argument must be positive");
  return std::log(positive);
}
inline double to_constrained(double u) { return std::exp(u); }
inline double positive_log_jacobian(double u) { return u; }

enum class BayesKind { BM1, BM2 };

/// A surrogate model lifted to a Bayesian posterior: Gaussian likelihood
/// around the family mean, configurable priors, positivity and optional
/// ordering transforms with exact Jacobians, analytic gradients.
///
/// BM1: polynomial basis mean, one shared noise variance.
/// BM2: Gaussian basis mean with intercept, one noise variance per frequency
/// band, and a hierarchical level mu_c over the basis widths.
class BayesModel {
 public:
  static BayesModel bm1(const Dataset& data, const SurrogateSpec& spec,
                        const PriorSpec& priors);
  static BayesModel bm2(const Dataset& data, const SurrogateSpec& spec,
                        const PriorSpec& priors, bool ordered_loc = true);

  BayesKind kind() const { return kind_; }
  bool heteroscedastic() const { return kind_ == BayesKind::BM2; }
  Eigen::Index dimension() const { return dimension_; }
  const SurrogateSpec& spec() const { return spec_; }
  const std::vector<double>& band_frequencies() const { return bands_; }
  std::size_t data_size() const { return y_.size(); }
  double observation(std::size_t i) const { return y_[i]; }

  /// Log posterior and gradient over unconstrained coordinates. The returned
  /// closure references this model, which must stay alive.
  TargetDensity target() const;

  double logp(const Eigen::VectorXd& u) const;
  /// Prior + transform-Jacobian part of logp (logp minus the log likelihood).
  double log_prior_jacobian(const Eigen::VectorXd& u) const;

  /// Unconstrained coordinates -> named physical parameters (dB scale).
  Eigen::VectorXd constrain(const Eigen::VectorXd& u) const;
  Eigen::VectorXd unconstrain(const Eigen::VectorXd& physical) const;
  std::vector<std::string> param_names() const;

  /// Map every stored draw through constrain() and attach parameter names.
  PosteriorSamples constrain_samples(const PosteriorSamples& raw) const;

  /// Physical draw row -> ParameterVector usable with the surrogate module.
  ParameterVector params_from_draw(std::span<const double> physical) const;

  /// Mean and noise variance at a query point under one physical draw.
  double mean_at(double speed_kmph, double frequency_hz,
                 std::span<const double> physical) const;
  double variance_at(double frequency_hz, std::span<const double> physical,
                     bool nearest_band_fallback = false) const;

  /// Gaussian log likelihood of observation i under one physical draw.
  double loglik_point(std::size_t i, std::span<const double> physical) const;

  /// Reasonable unconstrained starting point for the sampler.
  Eigen::VectorXd initial_point() const;

 private:
  BayesModel() = default;
  double eval(const Eigen::VectorXd& u, Eigen::VectorXd* grad,
              double* loglik_out) const;
  void check_dimension(std::span<const double> physical) const;

  BayesKind kind_ = BayesKind::BM1;
  SurrogateSpec spec_;
  PriorSpec priors_;
  bool ordered_loc_ = true;
  Eigen::Index dimension_ = 0;

  // per-record data
  std::vector<double> y_;      // observed SPL (dB)
  std::vector<double> speed_;  // km/h
  std::vector<double> freq_;   // Hz
  std::vector<double> phi_;    // physical term at b_scale = 1
  std::vector<double> x_;      // standardized transformed frequency
  std::vector<double> w_;      // standardized physical-term-free SPL
  std::vector<int> band_;      // record -> band id (BM2)
  std::vector<double> bands_;  // band id -> frequency (Hz)

  // standardization constants
  double x_mean_ = 0.0, x_sd_ = 1.0;
  double w_mean_ = 0.0, w_sd_ = 1.0;

  Eigen::MatrixXd design_;  // BM1: N x (m+1) powers of x
};

BayesModel build_bm1(const Dataset& data, const SurrogateSpec& spec,
                     const PriorSpec& priors);
BayesModel build_bm2(const Dataset& data, const SurrogateSpec& spec,
                     const PriorSpec& priors, bool ordered_loc = true);

/// Exact posterior for the known-mean Gaussian variance model:
/// InvGamma(shape + N/2, rate + sum (y - mean)^2 / 2).
InvGamma conjugate_oracle_posterior(std::span<const double> y,
                                    double known_mean, const InvGamma& prior);

struct PredictivePoint {
  double speed_kmph = 0.0;
  double frequency_hz = 0.0;
  double mean = 0.0;
  double lower95 = 0.0;
  double upper95 = 0.0;
};

struct PosteriorPredictive {
  std::vector<PredictivePoint> points;
  Eigen::MatrixXd samples;  // pooled draws x points
};

/// Simulated future observations on a (speed, frequency) grid, one per
/// retained posterior draw, summarized as mean and central 95% interval.
PosteriorPredictive posterior_predictive(
    const BayesModel& model, const PosteriorSamples& physical_samples,
    std::span<const std::pair<double, double>> grid, std::uint64_t seed = 0,
    bool nearest_band_fallback = false);

}  // namespace nvh
