#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "nvh/fit.hpp"
#include "nvh/serialize.hpp"
#include "nvh/stats.hpp"
#include "test_util.hpp"

using namespace nvh;

namespace {

SurrogateSpec poly_spec(int m) {
  return SurrogateSpec{Family::AeroPolynomial, m, 0, 6, 0.0, 1.0, 343.0,
                       FreqTransform::Log10};
}

Dataset poly_data(int m, const std::vector<double>& coeffs, double noise,
                  int replicates, std::uint64_t seed) {
  SynthConfig cfg;
  cfg.generating_spec = poly_spec(m);
  cfg.true_params.poly = coeffs;
  cfg.speeds = {140.0, 200.0};
  cfg.frequency_bands = default_frequency_bands();
  cfg.noise_sd_db = {noise};
  cfg.replicate_count = replicates;
  cfg.rng_seed = seed;
  return synthesize(cfg);
}

}  // namespace

TEST_CASE("r_squared reference values") {
  const std::vector<double> y{1.0, 2.0, 3.0};
  CHECK(r_squared(y, y) == 1.0);
  const std::vector<double> ybar{2.0, 2.0, 2.0};
  CHECK(r_squared(y, ybar) == 0.0);
  const std::vector<double> yhat{1.0, 2.0, 4.0};
  CHECK(r_squared(y, yhat) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(r_squared(ybar, y), degenerate_error);
  CHECK_THROWS_AS(r_squared(y, std::vector<double>{1.0}), dimension_error);
}

TEST_CASE("nls at the optimum stops immediately") {
  const std::vector<double> truth{4.0, -2.0, 0.5};
  const Dataset d = poly_data(2, truth, 0.0, 1, 5);
  ParameterVector init;
  init.poly = truth;
  const FitResult fit = nls_fit(d, poly_spec(2), init);
  CHECK(fit.converged);
  CHECK(fit.iterations <= 2);
  for (int j = 0; j < 3; ++j)
    CHECK(fit.params.poly[j] == doctest::Approx(truth[j]).epsilon(1e-8));
  CHECK(fit.residual_sd == doctest::Approx(0.0));
  CHECK(fit.r_squared == doctest::Approx(1.0));
}

TEST_CASE("linear-in-parameters fit equals the closed-form ols solution") {
  const std::vector<double> truth{4.0, -2.0, 0.5};
  const Dataset d = poly_data(2, truth, 1.5, 2, 17);
  const SurrogateSpec spec = poly_spec(2);
  const FitResult fit = nls_fit(d, spec, default_init(d, spec));
  REQUIRE(fit.converged);

  // normal-equations oracle on y - physical term
  const auto n = static_cast<Eigen::Index>(d.size());
  Eigen::MatrixXd X(n, 3);
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = std::log10(d[i].frequency_hz);
    X(i, 0) = 1.0;
    X(i, 1) = x;
    X(i, 2) = x * x;
    z[i] = d[i].spl_db - physical_aero_term(d[i].speed_kmph, spec, 1.0);
  }
  const Eigen::VectorXd ols =
      (X.transpose() * X).ldlt().solve(X.transpose() * z);
  for (int j = 0; j < 3; ++j)
    CHECK(fit.params.poly[j] == doctest::Approx(ols[j]).epsilon(1e-8));
}

TEST_CASE("too few records for the parameter count") {
  SynthConfig cfg;
  cfg.generating_spec = poly_spec(4);
  cfg.true_params.poly = {0, 0, 0, 0, 0};
  cfg.speeds = {140.0};
  cfg.frequency_bands = {100.0, 200.0, 400.0, 800.0};
  const Dataset d = synthesize(cfg);
  CHECK_THROWS_AS(
      nls_fit(d, cfg.generating_spec, default_init(d, cfg.generating_spec)),
      precondition_error);
}

TEST_CASE("accepted cost trace never increases") {
  SurrogateSpec spec{Family::AeroGaussian, 0, 2, 6, 0.0, 1.0, 343.0,
                     FreqTransform::Log10};
  SynthConfig cfg;
  cfg.generating_spec = spec;
  cfg.true_params.amp = {8.0, -4.0};
  cfg.true_params.loc = {2.5, 3.4};
  cfg.true_params.width = {0.3, 0.25};
  cfg.speeds = {140.0};
  cfg.frequency_bands = default_frequency_bands();
  cfg.noise_sd_db = {0.5};
  cfg.replicate_count = 2;
  cfg.rng_seed = 23;
  const Dataset d = synthesize(cfg);

  const FitResult fit = nls_fit(d, spec, default_init(d, spec));
  REQUIRE(fit.cost_trace.size() > 1);
  for (std::size_t i = 1; i < fit.cost_trace.size(); ++i)
    CHECK(fit.cost_trace[i] <= fit.cost_trace[i - 1]);
  CHECK(fit.converged);
  CHECK(fit.r_squared > 0.9);
}

TEST_CASE("gaussian-basis nls recovers a noiseless generator") {
  SurrogateSpec spec{Family::AeroGaussian, 0, 1, 6, 0.0, 1.0, 343.0,
                     FreqTransform::Log10};
  SynthConfig cfg;
  cfg.generating_spec = spec;
  cfg.true_params.amp = {6.0};
  cfg.true_params.loc = {3.0};
  cfg.true_params.width = {0.4};
  cfg.speeds = {140.0, 200.0};
  cfg.frequency_bands = default_frequency_bands();
  cfg.rng_seed = 3;
  const Dataset d = synthesize(cfg);
  const FitResult fit = nls_fit(d, spec, default_init(d, spec));
  REQUIRE(fit.converged);
  CHECK(fit.params.amp[0] == doctest::Approx(6.0).epsilon(1e-6));
  CHECK(fit.params.loc[0] == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(fit.params.width[0] == doctest::Approx(0.4).epsilon(1e-6));
}

TEST_CASE("kfold partitions are rejected when folds get too small") {
  const Dataset d = poly_data(2, {4.0, -2.0, 0.5}, 0.0, 1, 2);  // N = 40
  const SurrogateSpec spec = poly_spec(2);
  const ParameterVector init = default_init(d, spec);
  CHECK_THROWS_AS(kfold_cv(d, spec, init, 1, 1, 0), precondition_error);
  CHECK_THROWS_AS(kfold_cv(d, spec, init, 41, 1, 0), precondition_error);
  // k = N gives singleton folds
  CHECK_THROWS_AS(kfold_cv(d, spec, init, 40, 1, 0), partition_error);
  CHECK_THROWS_AS(kfold_cv(d, spec, init, 21, 1, 0), partition_error);
}

TEST_CASE("kfold on zero-noise data is essentially exact") {
  const Dataset d = poly_data(2, {4.0, -2.0, 0.5}, 0.0, 2, 2);
  const SurrogateSpec spec = poly_spec(2);
  for (int k : {5, 10}) {
    const CvReport report = kfold_cv(d, spec, default_init(d, spec), k, 1, 7);
    CHECK(report.r2_cv > 0.999);
    CHECK(static_cast<int>(report.fold_r2.size()) == k);
  }
}

TEST_CASE("kfold is reproducible bitwise for a fixed seed") {
  const Dataset d = poly_data(2, {4.0, -2.0, 0.5}, 1.0, 2, 29);
  const SurrogateSpec spec = poly_spec(2);
  const ParameterVector init = default_init(d, spec);
  const CvReport a = kfold_cv(d, spec, init, 5, 3, 99);
  const CvReport b = kfold_cv(d, spec, init, 5, 3, 99);
  CHECK(a.fold_r2 == b.fold_r2);
  CHECK(a.run_r2cv == b.run_r2cv);
  CHECK(a.r2_cv == b.r2_cv);
  CHECK(a.r2_var == b.r2_var);
  const CvReport c = kfold_cv(d, spec, init, 5, 3, 100);
  CHECK(a.run_r2cv != c.run_r2cv);
}

TEST_CASE("mean cv score tracks the variance decomposition") {
  const double sigma = 2.0;
  const Dataset d = poly_data(2, {10.0, -6.0, 1.0}, sigma, 5, 41);
  std::vector<double> y;
  for (const auto& r : d) y.push_back(r.spl_db);
  const double predicted = 1.0 - sigma * sigma / sample_variance(y);

  const SurrogateSpec spec = poly_spec(2);
  const CvReport report =
      kfold_cv(d, spec, default_init(d, spec), 5, 40, 2024);
  CHECK(report.r2_cv == doctest::Approx(predicted).epsilon(0.03));
  CHECK(report.r2_var < 0.01);
  CHECK(static_cast<int>(report.run_r2cv.size()) == 40);
}

TEST_CASE("cv report serializes") {
  const Dataset d = poly_data(2, {4.0, -2.0, 0.5}, 0.5, 2, 2);
  const SurrogateSpec spec = poly_spec(2);
  const CvReport report = kfold_cv(d, spec, default_init(d, spec), 5, 2, 1);
  const std::string json = to_json(report);
  CHECK(json.find("\"r2_cv\"") != std::string::npos);
  CHECK(json.find("\"fold_r2\"") != std::string::npos);
}
