#include "nvh/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "nvh/errors.hpp"

namespace nvh {

namespace {

void check_shape(const Eigen::MatrixXd& draws, Eigen::Index min_draws) {
  if (draws.rows() < 2)
    throw precondition_error("diagnostics: need at least 2 chains");
  if (draws.cols() < min_draws)
    throw precondition_error("diagnostics: need at least " +
                             std::to_string(min_draws) + " draws per chain");
}

}  // namespace

ChainVariances chain_variances(const Eigen::MatrixXd& draws) {
  check_shape(draws, 2);
  const auto m = draws.rows();
  const auto n = draws.cols();
  Eigen::VectorXd chain_mean(m);
  double within = 0.0;
  for (Eigen::Index c = 0; c < m; ++c) {
    chain_mean[c] = draws.row(c).mean();
    within += (draws.row(c).array() - chain_mean[c]).square().sum() /
              static_cast<double>(n - 1);
  }
  within /= static_cast<double>(m);
  const double grand = chain_mean.mean();
  const double between = static_cast<double>(n) *
                         (chain_mean.array() - grand).square().sum() /
                         static_cast<double>(m - 1);
  return {within, between};
}

double r_hat(const Eigen::MatrixXd& draws) {
  check_shape(draws, 2);
  const auto [within, between] = chain_variances(draws);
  const auto n = static_cast<double>(draws.cols());
  const double var_plus = (n - 1.0) / n * within + between / n;
  if (within == 0.0) {
    if (between > 0.0) return std::numeric_limits<double>::infinity();
    return 1.0;  // identical constant chains
  }
  return std::sqrt(var_plus / within);
}

Eigen::MatrixXi rank_histogram(const Eigen::MatrixXd& draws, int bins) {
  check_shape(draws, 1);
  if (bins < 1) throw precondition_error("rank_histogram: bins must be >= 1");
  const auto m = draws.rows();
  const auto n = draws.cols();
  const auto total = static_cast<std::size_t>(m * n);

  struct Entry {
    double value;
    Eigen::Index chain;
    Eigen::Index draw;
  };
  std::vector<Entry> entries;
  entries.reserve(total);
  for (Eigen::Index c = 0; c < m; ++c)
    for (Eigen::Index d = 0; d < n; ++d) entries.push_back({draws(c, d), c, d});
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.value < b.value; });

  // average ranks over ties
  std::vector<double> rank(total);
  std::size_t i = 0;
  while (i < total) {
    std::size_t j = i;
    while (j + 1 < total && entries[j + 1].value == entries[i].value) ++j;
    const double avg = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (std::size_t k = i; k <= j; ++k) rank[k] = avg;
    i = j + 1;
  }

  Eigen::MatrixXi hist = Eigen::MatrixXi::Zero(m, bins);
  for (std::size_t k = 0; k < total; ++k) {
    const double normalized = (rank[k] - 0.5) / static_cast<double>(total);
    const auto bin = std::min<Eigen::Index>(
        bins - 1, static_cast<Eigen::Index>(normalized * bins));
    hist(entries[k].chain, bin) += 1;
  }
  return hist;
}

double ess(const Eigen::MatrixXd& draws) {
  check_shape(draws, 4);
  const auto m = draws.rows();
  const auto n = draws.cols();
  const auto [within, between] = chain_variances(draws);
  const double var_plus =
      (static_cast<double>(n) - 1.0) / static_cast<double>(n) * within +
      between / static_cast<double>(n);
  if (!(var_plus > 0.0)) return 1.0;

  Eigen::VectorXd chain_mean(m);
  for (Eigen::Index c = 0; c < m; ++c) chain_mean[c] = draws.row(c).mean();

  // biased autocovariance at lag t, averaged over chains
  auto mean_autocov = [&](Eigen::Index t) {
    double acc = 0.0;
    for (Eigen::Index c = 0; c < m; ++c) {
      double s = 0.0;
      for (Eigen::Index d = 0; d + t < n; ++d)
        s += (draws(c, d) - chain_mean[c]) * (draws(c, d + t) - chain_mean[c]);
      acc += s / static_cast<double>(n);
    }
    return acc / static_cast<double>(m);
  };

  auto rho = [&](Eigen::Index t) {
    return 1.0 - (within - mean_autocov(t)) / var_plus;
  };

  // Geyer initial monotone sequence over pair sums
  double tau = 1.0;  // rho_0
  double prev_pair = std::numeric_limits<double>::infinity();
  for (Eigen::Index t = 1; t + 1 < n; t += 2) {
    double pair = rho(t) + rho(t + 1);
    if (pair < 0.0) break;
    pair = std::min(pair, prev_pair);
    prev_pair = pair;
    tau += 2.0 * pair;
  }
  const double total = static_cast<double>(m) * static_cast<double>(n);
  return std::max(total / tau, 1.0);
}

ConvergenceReport diagnose(const PosteriorSamples& samples, int bins) {
  ConvergenceReport report;
  for (Eigen::Index p = 0; p < samples.dimension(); ++p) {
    const Eigen::MatrixXd draws = samples.parameter_matrix(static_cast<int>(p));
    ParamDiagnostics d;
    d.name = p < static_cast<Eigen::Index>(samples.param_names.size())
                 ? samples.param_names[static_cast<std::size_t>(p)]
                 : "theta[" + std::to_string(p) + "]";
    d.r_hat = r_hat(draws);
    d.ess = ess(draws);
    const auto [w, b] = chain_variances(draws);
    d.within = w;
    d.between = b;
    d.rank_hist = rank_histogram(draws, bins);
    report.max_r_hat = std::max(report.max_r_hat, d.r_hat);
    report.params.push_back(std::move(d));
  }
  return report;
}

}  // namespace nvh
