#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "nvh/bayes.hpp"
#include "nvh/sampler.hpp"

namespace nvh {

/// log f(y_i | theta_j) for every pooled draw j (rows) and observation i
/// (columns) under the model's Gaussian likelihood.
Eigen::MatrixXd pointwise_loglik(const BayesModel& model,
                                 const PosteriorSamples& physical_samples);

struct PsisResult {
  std::vector<double> weights;  // normalized to sum 1
  double k_hat = 0.0;           // NaN when the tail was not fitted
};

/// Pareto-smoothed importance weights for one observation. Fits a
/// generalized Pareto distribution to the largest min(0.2 S, 3 sqrt(S))
/// weights by profile likelihood, replaces them with expected order
/// statistics, truncates at the raw maximum and normalizes. Fewer than 100
/// draws fall back to plain truncation at mean * sqrt(S).
PsisResult psis_smooth(std::span<const double> raw_log_weights);

/// Profile-likelihood generalized Pareto fit to exceedances z > 0;
/// returns (k, sigma).
std::pair<double, double> gpd_fit(std::vector<double> z);

struct LooReport {
  std::string model_id;
  double elpd = 0.0;
  double p_loo = 0.0;
  double se = 0.0;
  std::vector<double> k_hat;        // one per observation
  std::vector<double> elpd_points;  // pointwise contributions
  int n_obs = 0;
  int n_draws = 0;
  std::vector<int> high_k_indices;  // observations with k_hat > 0.7
};

/// PSIS-LOO from a precomputed pointwise log-likelihood matrix.
LooReport psis_loo_from_loglik(const Eigen::MatrixXd& loglik,
                               std::string model_id = "");

LooReport psis_loo(const BayesModel& model,
                   const PosteriorSamples& physical_samples,
                   std::string model_id = "");

struct RankEntry {
  std::string model_id;
  int rank = 0;
  double elpd = 0.0;
  double p_loo = 0.0;
  double se = 0.0;
};

/// Rank models by elpd (descending); ties broken by lower se, then id.
/// All reports must score the same observations.
std::vector<RankEntry> compare(const std::vector<LooReport>& reports);

inline constexpr double k_hat_good = 0.5;
inline constexpr double k_hat_flag = 0.7;

}  // namespace nvh
