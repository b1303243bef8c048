#include "nvh/loo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "nvh/stats.hpp"

namespace nvh {

Eigen::MatrixXd pointwise_loglik(const BayesModel& model,
                                 const PosteriorSamples& physical_samples) {
  if (physical_samples.dimension() != model.dimension())
    throw config_error("pointwise_loglik: samples do not match the model");
  const Eigen::MatrixXd pooled = physical_samples.pooled();
  const auto n_draws = pooled.rows();
  const auto n_obs = static_cast<Eigen::Index>(model.data_size());
  Eigen::MatrixXd loglik(n_draws, n_obs);
  Eigen::VectorXd draw(pooled.cols());
  for (Eigen::Index j = 0; j < n_draws; ++j) {
    draw = pooled.row(j).transpose();
    const std::span<const double> row(draw.data(),
                                      static_cast<std::size_t>(draw.size()));
    for (Eigen::Index i = 0; i < n_obs; ++i)
      loglik(j, i) = model.loglik_point(static_cast<std::size_t>(i), row);
  }
  return loglik;
}

std::pair<double, double> gpd_fit(std::vector<double> z) {
  if (z.empty()) throw precondition_error("gpd_fit: no exceedances");
  std::sort(z.begin(), z.end());
  const auto n = static_cast<int>(z.size());
  const double z_max = z.back();
  if (!(z_max > 0.0)) return {0.0, 0.0};

  double quartile = z[std::max(0, static_cast<int>(std::floor(n / 4.0 + 0.5)) - 1)];
  if (!(quartile > 0.0)) quartile = z_max * 1e-3;

  const int grid = 30 + static_cast<int>(std::floor(std::sqrt(n)));
  std::vector<double> b(grid), profile(grid);
  for (int j = 0; j < grid; ++j) {
    b[j] = 1.0 / z_max +
           (1.0 - std::sqrt(static_cast<double>(grid) / (j + 0.5))) /
               (3.0 * quartile);
    double k = 0.0;
    for (double zi : z) k += std::log1p(-b[j] * zi);
    k /= n;
    profile[j] = k == 0.0 ? -std::numeric_limits<double>::infinity()
                          : n * (std::log(-b[j] / k) - k - 1.0);
  }

  // profile-likelihood-weighted average of the grid points
  double p_max = -std::numeric_limits<double>::infinity();
  for (double p : profile)
    if (std::isfinite(p)) p_max = std::max(p_max, p);
  double wsum = 0.0, b_hat = 0.0;
  for (int j = 0; j < grid; ++j) {
    if (!std::isfinite(profile[j])) continue;
    const double w = std::exp(profile[j] - p_max);
    wsum += w;
    b_hat += w * b[j];
  }
  b_hat /= wsum;

  double k_hat = 0.0;
  for (double zi : z) k_hat += std::log1p(-b_hat * zi);
  k_hat /= n;
  const double sigma = -k_hat / b_hat;
  return {k_hat, sigma};
}

namespace {

double gpd_quantile(double p, double k, double sigma) {
  if (std::abs(k) < 1e-12) return -sigma * std::log1p(-p);
  return sigma * std::expm1(-k * std::log1p(-p)) / k;
}

}  // namespace

PsisResult psis_smooth(std::span<const double> raw_log_weights) {
  const auto s = static_cast<int>(raw_log_weights.size());
  if (s < 1) throw precondition_error("psis_smooth: empty weights");

  const double max_lw =
      *std::max_element(raw_log_weights.begin(), raw_log_weights.end());
  std::vector<double> w(s);
  for (int j = 0; j < s; ++j) w[j] = std::exp(raw_log_weights[j] - max_lw);

  PsisResult result;
  result.k_hat = std::numeric_limits<double>::quiet_NaN();

  const double w_min = *std::min_element(w.begin(), w.end());
  if (1.0 - w_min < 1e-13) {
    // all weights equal: nothing to smooth
    result.weights.assign(s, 1.0 / s);
    result.k_hat = 0.0;
    return result;
  }

  if (s < 100) {
    // truncation-only fallback
    const double bound = mean(w) * std::sqrt(static_cast<double>(s));
    for (double& v : w) v = std::min(v, bound);
  } else {
    const int tail = static_cast<int>(std::ceil(
        std::min(0.2 * s, 3.0 * std::sqrt(static_cast<double>(s)))));
    std::vector<int> order(s);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return w[a] < w[b]; });

    const double cutoff = w[order[s - tail - 1]];
    std::vector<double> exceedances;
    exceedances.reserve(tail);
    for (int j = s - tail; j < s; ++j)
      exceedances.push_back(w[order[j]] - cutoff);

    if (*std::max_element(exceedances.begin(), exceedances.end()) > 0.0) {
      const auto [k, sigma] = gpd_fit(exceedances);
      result.k_hat = k;
      const double w_max = w[order[s - 1]];
      for (int j = 0; j < tail; ++j) {
        const double p = (j + 0.5) / tail;
        const double smoothed = cutoff + gpd_quantile(p, k, sigma);
        w[order[s - tail + j]] = std::min(smoothed, w_max);
      }
    } else {
      result.k_hat = 0.0;  // degenerate flat tail
    }
  }

  double total = 0.0;
  for (double v : w) total += v;
  for (double& v : w) v /= total;
  result.weights = std::move(w);
  return result;
}

LooReport psis_loo_from_loglik(const Eigen::MatrixXd& loglik,
                               std::string model_id) {
  const auto n_draws = loglik.rows();
  const auto n_obs = loglik.cols();
  if (n_draws < 1 || n_obs < 1)
    throw precondition_error("psis_loo: empty log-likelihood matrix");

  LooReport report;
  report.model_id = std::move(model_id);
  report.n_obs = static_cast<int>(n_obs);
  report.n_draws = static_cast<int>(n_draws);

  const double log_s = std::log(static_cast<double>(n_draws));
  std::vector<double> raw_lw(n_draws), scored(n_draws);
  double p_loo = 0.0;
  for (Eigen::Index i = 0; i < n_obs; ++i) {
    for (Eigen::Index j = 0; j < n_draws; ++j) raw_lw[j] = -loglik(j, i);
    const PsisResult psis = psis_smooth(raw_lw);
    report.k_hat.push_back(psis.k_hat);
    if (psis.k_hat > k_hat_flag)
      report.high_k_indices.push_back(static_cast<int>(i));

    for (Eigen::Index j = 0; j < n_draws; ++j)
      scored[j] = std::log(psis.weights[j]) + loglik(j, i);
    const double elpd_i = logsumexp(scored);
    report.elpd_points.push_back(elpd_i);
    report.elpd += elpd_i;

    for (Eigen::Index j = 0; j < n_draws; ++j) scored[j] = loglik(j, i);
    const double lpd_i = logsumexp(scored) - log_s;
    p_loo += lpd_i - elpd_i;
  }
  report.p_loo = p_loo;
  report.se = n_obs > 1
                  ? std::sqrt(static_cast<double>(n_obs) *
                              sample_variance(report.elpd_points))
                  : 0.0;
  return report;
}

LooReport psis_loo(const BayesModel& model,
                   const PosteriorSamples& physical_samples,
                   std::string model_id) {
  return psis_loo_from_loglik(pointwise_loglik(model, physical_samples),
                              std::move(model_id));
}

std::vector<RankEntry> compare(const std::vector<LooReport>& reports) {
  if (reports.empty()) throw precondition_error("compare: no reports");
  for (const auto& r : reports)
    if (r.n_obs != reports.front().n_obs)
      throw comparison_error("compare: reports score different datasets (" +
                             std::to_string(r.n_obs) + " vs " +
                             std::to_string(reports.front().n_obs) +
                             " observations)");

  std::vector<RankEntry> table;
  for (const auto& r : reports)
    table.push_back({r.model_id, 0, r.elpd, r.p_loo, r.se});
  std::sort(table.begin(), table.end(), [](const RankEntry& a,
                                           const RankEntry& b) {
    if (a.elpd != b.elpd) return a.elpd > b.elpd;
    if (a.se != b.se) return a.se < b.se;
    return a.model_id < b.model_id;
  });
  for (std::size_t i = 0; i < table.size(); ++i)
    table[i].rank = static_cast<int>(i);
  return table;
}

}  // namespace nvh
