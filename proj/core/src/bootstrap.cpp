#include "nvh/bootstrap.hpp"

#include <algorithm>
#include <cmath>

#include "nvh/rng.hpp"
#include "nvh/stats.hpp"

namespace nvh {

BootstrapResult parametric_bootstrap(const Dataset& data,
                                     const BootstrapConfig& config) {
  if (config.spec.family != Family::Tire)
    throw spec_error("parametric_bootstrap: spec must use the tire family");
  if (config.replicates < 2)
    throw precondition_error("parametric_bootstrap: need B >= 2");

  const ParameterVector init =
      config.init ? *config.init : default_init(data, config.spec);
  const FitResult point = nls_fit(data, config.spec, init, config.fit_options);

  BootstrapResult result;
  result.spec = config.spec;
  result.theta_hat = point.params;
  result.param_names = free_param_names(config.spec);
  result.noise_sd = config.noise_mode == BootstrapNoise::FixedSd
                        ? config.fixed_sd
                        : point.residual_sd;
  if (!(result.noise_sd >= 0.0))
    throw domain_error("parametric_bootstrap: negative noise sd");

  const int p = free_param_count(config.spec);
  const auto n = data.size();
  const CounterRng base(config.seed);
  std::vector<Eigen::VectorXd> kept;
  kept.reserve(config.replicates);

  for (int b = 0; b < config.replicates; ++b) {
    CounterRng rng = base.substream(static_cast<std::uint64_t>(b));

    std::vector<SpectrumRecord> sim;
    sim.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t src =
          config.input_resampling ? rng.uniform_int(n) : i;
      SpectrumRecord r = data[src];
      const double mu =
          mean_value(r.speed_kmph, r.frequency_hz, config.spec, point.params);
      r.spl_db = result.noise_sd > 0.0 ? mu + result.noise_sd * rng.normal()
                                       : mu;
      sim.push_back(std::move(r));
    }

    try {
      const Dataset sim_data(data.schema(), std::move(sim));
      const FitResult refit =
          nls_fit(sim_data, config.spec, point.params, config.fit_options);
      if (!refit.converged) {
        ++result.failed_replicates;
        continue;
      }
      const auto theta = get_free_params(config.spec, refit.params);
      kept.push_back(
          Eigen::Map<const Eigen::VectorXd>(theta.data(), theta.size()));
    } catch (const std::runtime_error&) {
      ++result.failed_replicates;
    }
  }

  if (kept.empty())
    throw precondition_error("parametric_bootstrap: every replicate failed");

  result.replicate_params.resize(static_cast<Eigen::Index>(kept.size()), p);
  for (std::size_t r = 0; r < kept.size(); ++r)
    result.replicate_params.row(static_cast<Eigen::Index>(r)) =
        kept[r].transpose();

  for (int j = 0; j < p; ++j) {
    const Eigen::VectorXd col = result.replicate_params.col(j);
    const std::vector<double> values(col.data(), col.data() + col.size());
    result.param_sd.push_back(values.size() > 1 ? sample_sd(values) : 0.0);
  }
  return result;
}

std::vector<PredictionBand> predict_bands(
    const BootstrapResult& result,
    std::span<const std::pair<double, double>> grid, bool include_noise,
    std::uint64_t noise_seed) {
  const auto n_rep = result.replicate_params.rows();
  if (n_rep < 2)
    throw precondition_error("predict_bands: need at least 2 replicates");

  std::vector<ParameterVector> params;
  params.reserve(static_cast<std::size_t>(n_rep));
  for (Eigen::Index r = 0; r < n_rep; ++r) {
    ParameterVector pv = result.theta_hat;
    const Eigen::VectorXd row = result.replicate_params.row(r).transpose();
    set_free_params(result.spec,
                    std::span<const double>(row.data(),
                                            static_cast<std::size_t>(row.size())),
                    pv);
    params.push_back(std::move(pv));
  }

  std::vector<PredictionBand> bands;
  const CounterRng base(noise_seed);
  std::vector<double> values(static_cast<std::size_t>(n_rep));
  for (std::size_t g = 0; g < grid.size(); ++g) {
    CounterRng rng = base.substream(g);
    const auto [speed, freq] = grid[g];
    for (Eigen::Index r = 0; r < n_rep; ++r) {
      double v = mean_value(speed, freq, result.spec,
                            params[static_cast<std::size_t>(r)]);
      if (include_noise) v += result.noise_sd * rng.normal();
      values[static_cast<std::size_t>(r)] = v;
    }
    PredictionBand band;
    band.speed_kmph = speed;
    band.frequency_hz = freq;
    band.mean = mean(values);
    std::sort(values.begin(), values.end());
    band.lower95 = quantile_sorted(values, 0.025);
    band.upper95 = quantile_sorted(values, 0.975);
    bands.push_back(band);
  }
  return bands;
}

}  // namespace nvh
