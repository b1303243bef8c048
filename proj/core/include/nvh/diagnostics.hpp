#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "nvh/sampler.hpp"

namespace nvh {

/// Gelman-Rubin potential scale reduction factor,
/// R-hat = sqrt(var_plus / W) with var_plus = (N-1)/N W + B/N.
/// `draws` is chains x draws. Stuck distinct chains (W = 0, B > 0) yield +inf.
double r_hat(const Eigen::MatrixXd& draws);

/// Within-chain (W) and between-chain (B) variances used by r_hat.
struct ChainVariances {
  double within = 0.0;
  double between = 0.0;
};
ChainVariances chain_variances(const Eigen::MatrixXd& draws);

/// Histograms of pooled ranks (average ties) split back per chain.
/// Result is chains x bins; each row sums to draws-per-chain.
Eigen::MatrixXi rank_histogram(const Eigen::MatrixXd& draws, int bins = 20);

/// Effective sample size via Geyer initial-monotone autocorrelation sums.
/// Constant chains report the sentinel minimum of 1.
double ess(const Eigen::MatrixXd& draws);

struct ParamDiagnostics {
  std::string name;
  double r_hat = 0.0;
  double ess = 0.0;
  double within = 0.0;
  double between = 0.0;
  Eigen::MatrixXi rank_hist;
};

struct ConvergenceReport {
  std::vector<ParamDiagnostics> params;
  double max_r_hat = 0.0;
};

ConvergenceReport diagnose(const PosteriorSamples& samples, int bins = 20);

}  // namespace nvh
