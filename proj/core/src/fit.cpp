#include "nvh/fit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "nvh/rng.hpp"
#include "nvh/stats.hpp"

namespace nvh {

namespace {

Eigen::VectorXd residuals(const Dataset& data, const SurrogateSpec& spec,
                          const ParameterVector& params) {
  const auto mu = mean_vector(data, spec, params);
  Eigen::VectorXd r(static_cast<Eigen::Index>(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i)
    r[static_cast<Eigen::Index>(i)] = data[i].spl_db - mu[i];
  return r;
}

Eigen::MatrixXd jacobian(const Dataset& data, const SurrogateSpec& spec,
                         const ParameterVector& params) {
  const int p = free_param_count(spec);
  Eigen::MatrixXd J(static_cast<Eigen::Index>(data.size()), p);
  std::vector<double> grad(p);
  for (std::size_t i = 0; i < data.size(); ++i) {
    mean_gradient(data[i].speed_kmph, data[i].frequency_hz, spec, params, grad);
    for (int j = 0; j < p; ++j) J(static_cast<Eigen::Index>(i), j) = grad[j];
  }
  return J;
}

double condition_estimate(const Eigen::MatrixXd& A) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s[s.size() - 1] <= 0.0)
    return std::numeric_limits<double>::infinity();
  return s[0] / s[s.size() - 1];
}

}  // namespace

double r_squared(std::span<const double> y, std::span<const double> yhat) {
  if (y.size() != yhat.size())
    throw dimension_error("r_squared: length mismatch");
  if (y.size() < 2) throw precondition_error("r_squared: need at least 2 points");
  const double ybar = mean(y);
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ss_res += (y[i] - yhat[i]) * (y[i] - yhat[i]);
    ss_tot += (y[i] - ybar) * (y[i] - ybar);
  }
  if (ss_tot == 0.0)
    throw degenerate_error("r_squared: observed values are constant");
  return 1.0 - ss_res / ss_tot;
}

ParameterVector default_init(const Dataset& data, const SurrogateSpec& spec) {
  if (data.size() == 0) throw precondition_error("default_init: empty dataset");
  double tmin = std::numeric_limits<double>::infinity();
  double tmax = -std::numeric_limits<double>::infinity();
  for (const auto& r : data) {
    const double t = transform_frequency(r.frequency_hz, spec);
    tmin = std::min(tmin, t);
    tmax = std::max(tmax, t);
  }
  const double range = std::max(tmax - tmin, 1e-3);

  ParameterVector params;
  const bool uses_poly =
      spec.family == Family::AeroPolynomial || spec.family == Family::Tire;
  const bool uses_gauss =
      spec.family == Family::AeroGaussian || spec.family == Family::Tire;
  if (uses_poly) params.poly.assign(spec.m + 1, 0.0);
  if (uses_gauss && spec.n > 0) {
    params.amp.assign(spec.n, 0.0);
    params.loc.resize(spec.n);
    if (spec.n == 1) {
      params.loc[0] = tmin + 0.5 * range;
    } else {
      for (int k = 0; k < spec.n; ++k)
        params.loc[k] = tmin + range * k / (spec.n - 1);
    }
    params.width.assign(spec.n, range / spec.n);
  }
  return params;
}

FitResult nls_fit(const Dataset& data, const SurrogateSpec& spec,
                  const ParameterVector& init, const FitOptions& options) {
  validate(spec, init);
  const int p = free_param_count(spec);
  const auto n = static_cast<int>(data.size());
  if (n <= p)
    throw precondition_error("nls_fit: need more records (" +
                             std::to_string(n) + ") than free parameters (" +
                             std::to_string(p) + ")");

  ParameterVector params = init;
  Eigen::VectorXd r = residuals(data, spec, params);
  double cost = r.squaredNorm();

  FitResult result;
  result.cost_trace.push_back(cost);

  double lambda = options.lambda_init;
  bool converged = false;
  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    const Eigen::MatrixXd J = jacobian(data, spec, params);
    const Eigen::VectorXd g = J.transpose() * r;  // -(1/2) cost gradient
    if (2.0 * g.lpNorm<Eigen::Infinity>() < options.grad_tol) {
      converged = true;
      break;
    }
    const Eigen::MatrixXd JtJ = J.transpose() * J;
    Eigen::VectorXd damping = JtJ.diagonal();
    const double floor = std::max(damping.maxCoeff(), 1.0) * 1e-12;
    damping = damping.cwiseMax(floor);

    bool accepted = false;
    while (!accepted) {
      Eigen::MatrixXd A = JtJ;
      A.diagonal() += lambda * damping;
      const Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
      if (ldlt.info() != Eigen::Success)
        throw conditioning_error("nls_fit: normal equations not solvable",
                                 condition_estimate(JtJ));
      const Eigen::VectorXd step = ldlt.solve(g);
      if (!step.allFinite())
        throw conditioning_error("nls_fit: singular normal equations",
                                 condition_estimate(JtJ));

      ParameterVector trial = params;
      auto theta = get_free_params(spec, params);
      for (int j = 0; j < p; ++j) theta[j] += step[j];
      set_free_params(spec, theta, trial);

      double trial_cost = std::numeric_limits<double>::infinity();
      Eigen::VectorXd trial_r;
      bool valid = true;
      try {
        validate(spec, trial);
        trial_r = residuals(data, spec, trial);
        trial_cost = trial_r.squaredNorm();
      } catch (const std::runtime_error&) {
        valid = false;  // step left the parameter domain, treat as rejection
      }

      if (valid && trial_cost <= cost) {
        const double decrease =
            cost > 0.0 ? (cost - trial_cost) / cost : 0.0;
        params = std::move(trial);
        r = std::move(trial_r);
        cost = trial_cost;
        result.cost_trace.push_back(cost);
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
        if (decrease < options.cost_tol) converged = true;
      } else {
        lambda *= 10.0;
        if (lambda > 1e12) break;  // stuck; leave converged = false
      }
    }
    if (converged || !accepted) {
      if (accepted) ++iter;
      break;
    }
  }

  result.params = params;
  result.iterations = iter;
  result.converged = converged;
  const double ss_res = cost;
  result.residual_sd = n > p ? std::sqrt(ss_res / (n - p)) : 0.0;

  std::vector<double> y(data.size()), yhat(data.size());
  const auto mu = mean_vector(data, spec, params);
  for (std::size_t i = 0; i < data.size(); ++i) {
    y[i] = data[i].spl_db;
    yhat[i] = mu[i];
  }
  double ybar = mean(y), ss_tot = 0.0;
  for (double v : y) ss_tot += (v - ybar) * (v - ybar);
  result.r_squared = ss_tot > 0.0
                         ? 1.0 - ss_res / ss_tot
                         : std::numeric_limits<double>::quiet_NaN();
  return result;
}

CvReport kfold_cv(const Dataset& data, const SurrogateSpec& spec,
                  const ParameterVector& init, int k, int runs,
                  std::uint64_t seed, const FitOptions& options) {
  const auto n = static_cast<int>(data.size());
  if (k < 2 || k > n)
    throw precondition_error("kfold_cv: k must satisfy 2 <= k <= N");
  if (n / k < 2)
    throw partition_error("kfold_cv: folds of fewer than 2 records (N=" +
                          std::to_string(n) + ", k=" + std::to_string(k) + ")");
  if (runs < 1) throw precondition_error("kfold_cv: runs must be >= 1");

  CvReport report;
  report.k = k;
  report.runs = runs;
  report.rng_seed = seed;

  const CounterRng master(seed);
  for (int run = 0; run < runs; ++run) {
    CounterRng rng = master.substream(static_cast<std::uint64_t>(run));
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (int i = n - 1; i > 0; --i) {
      const auto j = static_cast<int>(
          rng.uniform_int(static_cast<std::uint64_t>(i) + 1));
      std::swap(order[i], order[j]);
    }

    std::vector<double> fold_scores(k);
    for (int fold = 0; fold < k; ++fold) {
      std::vector<SpectrumRecord> train;
      std::vector<int> test_idx;
      for (int pos = 0; pos < n; ++pos) {
        if (pos % k == fold)
          test_idx.push_back(order[pos]);
        else
          train.push_back(data[order[pos]]);
      }
      const Dataset train_set(data.schema(), std::move(train));
      const FitResult fit = nls_fit(train_set, spec, init, options);

      std::vector<double> y_test, yhat_test;
      y_test.reserve(test_idx.size());
      yhat_test.reserve(test_idx.size());
      for (int idx : test_idx) {
        y_test.push_back(data[idx].spl_db);
        yhat_test.push_back(mean_value(data[idx].speed_kmph,
                                       data[idx].frequency_hz, spec,
                                       fit.params));
      }
      fold_scores[fold] = r_squared(y_test, yhat_test);
    }
    const double run_mean = mean(fold_scores);
    report.run_r2cv.push_back(run_mean);
    if (run == 0) report.fold_r2 = fold_scores;
  }

  report.r2_cv = mean(report.run_r2cv);
  report.r2_var = runs > 1 ? sample_variance(report.run_r2cv) : 0.0;
  return report;
}

}  // namespace nvh
