#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nvh/dataset.hpp"
#include "nvh/surrogate.hpp"

namespace nvh {

struct FitOptions {
  int max_iterations = 500;
  double cost_tol = 1e-10;   // relative cost decrease
  double grad_tol = 1e-8;    // infinity norm of the cost gradient
  double lambda_init = 1e-3; // Levenberg-Marquardt damping
};

struct FitResult {
  ParameterVector params;
  double residual_sd = 0.0;  // sqrt(SSR / (N - p))
  double r_squared = 0.0;    // on the training data
  int iterations = 0;
  bool converged = false;
  std::vector<double> cost_trace;  // accepted costs, starting at the initial
};

/// Point estimate by damped Gauss-Newton (Levenberg-Marquardt) least squares.
FitResult nls_fit(const Dataset& data, const SurrogateSpec& spec,
                  const ParameterVector& init, const FitOptions& options = {});

/// Default starting point: zero poly/amp blocks, locations spread evenly over
/// the observed transformed-frequency range, widths = range / n.
ParameterVector default_init(const Dataset& data, const SurrogateSpec& spec);

/// Coefficient of determination 1 - SS_res / SS_tot.
double r_squared(std::span<const double> y, std::span<const double> yhat);

struct CvReport {
  int k = 0;
  std::vector<double> fold_r2;   // per-fold scores of the first run
  double r2_cv = 0.0;            // mean of per-run R2_CV values
  double r2_var = 0.0;           // variance of R2_CV across runs (0 if runs == 1)
  int runs = 0;
  std::uint64_t rng_seed = 0;
  std::vector<double> run_r2cv;  // one R2_CV per run
};

/// Repeated K-fold cross-validation with fresh random folds every run.
/// Fold sizes differ by at most one record and every fold must keep at least
/// two records.
CvReport kfold_cv(const Dataset& data, const SurrogateSpec& spec,
                  const ParameterVector& init, int k, int runs,
                  std::uint64_t seed, const FitOptions& options = {});

}  // namespace nvh
