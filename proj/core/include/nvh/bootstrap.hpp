#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nvh/dataset.hpp"
#include "nvh/fit.hpp"
#include "nvh/surrogate.hpp"

namespace nvh {

enum class BootstrapNoise { FixedSd, ResidualSd };

struct BootstrapConfig {
  int replicates = 1000;  // B
  SurrogateSpec spec;     // family Tire
  BootstrapNoise noise_mode = BootstrapNoise::ResidualSd;
  double fixed_sd = 1.0;  // used when noise_mode == FixedSd
  std::uint64_t seed = 0;
  bool input_resampling = true;  // resample (v, f) rows with replacement
  std::optional<ParameterVector> init;  // point-fit start; default_init if unset
  FitOptions fit_options;
};

struct BootstrapResult {
  ParameterVector theta_hat;
  Eigen::MatrixXd replicate_params;  // (B - failed) x p
  std::vector<double> param_sd;
  std::vector<std::string> param_names;
  int failed_replicates = 0;
  double noise_sd = 0.0;  // sd used to simulate eta
  SurrogateSpec spec;
};

/// Parametric bootstrap: point fit, then B rounds of (simulate inputs,
/// simulate data from theta_hat plus Gaussian noise, warm-started refit).
/// Deterministic given the seed; replicates own independent RNG substreams.
BootstrapResult parametric_bootstrap(const Dataset& data,
                                     const BootstrapConfig& config);

struct PredictionBand {
  double speed_kmph = 0.0;
  double frequency_hz = 0.0;
  double mean = 0.0;
  double lower95 = 0.0;
  double upper95 = 0.0;
};

/// Pointwise mean and central 95% interval of the replicate mean curves.
/// include_noise adds simulated observation noise on top (predictive band).
std::vector<PredictionBand> predict_bands(
    const BootstrapResult& result,
    std::span<const std::pair<double, double>> grid, bool include_noise = false,
    std::uint64_t noise_seed = 0);

}  // namespace nvh
