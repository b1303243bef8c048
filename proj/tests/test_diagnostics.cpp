#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "nvh/diagnostics.hpp"
#include "nvh/rng.hpp"
#include "nvh/serialize.hpp"
#include "nvh/stats.hpp"

using namespace nvh;

TEST_CASE("r_hat of two identical chains {1,2,3}") {
  Eigen::MatrixXd draws(2, 3);
  draws << 1, 2, 3, 1, 2, 3;
  // W = 1, B = 0, var_plus = 2/3
  CHECK(std::abs(r_hat(draws) - std::sqrt(2.0 / 3.0)) < 1e-12);
}

TEST_CASE("r_hat near one for chains from the same distribution") {
  CounterRng rng(42);
  Eigen::MatrixXd draws(4, 10000);
  for (int c = 0; c < 4; ++c)
    for (int d = 0; d < 10000; ++d) draws(c, d) = rng.normal();
  const double r = r_hat(draws);
  CHECK(r > 0.999);
  CHECK(r < 1.01);
}

TEST_CASE("r_hat flags separated chains") {
  CounterRng rng(43);
  Eigen::MatrixXd draws(2, 1000);
  for (int d = 0; d < 1000; ++d) {
    draws(0, d) = rng.normal();
    draws(1, d) = 10.0 + rng.normal();
  }
  CHECK(r_hat(draws) > 3.0);
}

TEST_CASE("r_hat of stuck distinct chains is infinite") {
  Eigen::MatrixXd draws = Eigen::MatrixXd::Zero(2, 10);
  draws.row(1).setConstant(2.0);
  CHECK(std::isinf(r_hat(draws)));
  // identical constant chains are not flagged
  draws.row(1).setConstant(0.0);
  CHECK(r_hat(draws) == 1.0);
}

TEST_CASE("r_hat is invariant under common affine maps") {
  CounterRng rng(44);
  Eigen::MatrixXd draws(3, 500);
  for (int c = 0; c < 3; ++c)
    for (int d = 0; d < 500; ++d) draws(c, d) = rng.normal(c * 0.1, 1.0);
  const double base = r_hat(draws);
  const Eigen::MatrixXd mapped = (-2.5 * draws).array() + 7.0;
  CHECK(r_hat(mapped) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("rank histogram of identical chains is uniform") {
  CounterRng rng(45);
  Eigen::MatrixXd draws(2, 100);
  for (int d = 0; d < 100; ++d) draws(0, d) = rng.normal();
  draws.row(1) = draws.row(0);
  const Eigen::MatrixXi hist = rank_histogram(draws, 20);
  for (int c = 0; c < 2; ++c) {
    CHECK(hist.row(c).sum() == 100);
    for (int b = 0; b < 20; ++b) CHECK(hist(c, b) == 5);
  }
}

TEST_CASE("rank histogram concentrates for a shifted chain") {
  CounterRng rng(46);
  Eigen::MatrixXd draws(2, 200);
  for (int d = 0; d < 200; ++d) {
    draws(0, d) = rng.normal();
    draws(1, d) = 100.0 + rng.normal();
  }
  const Eigen::MatrixXi hist = rank_histogram(draws, 20);
  int top_half = 0;
  for (int b = 10; b < 20; ++b) top_half += hist(1, b);
  CHECK(top_half == 200);
}

TEST_CASE("rank histogram is invariant under monotone transforms") {
  CounterRng rng(47);
  Eigen::MatrixXd draws(2, 300);
  for (int c = 0; c < 2; ++c)
    for (int d = 0; d < 300; ++d) draws(c, d) = rng.normal();
  const Eigen::MatrixXi base = rank_histogram(draws, 20);
  const Eigen::MatrixXd mapped = draws.array().exp();
  CHECK((rank_histogram(mapped, 20) - base).cwiseAbs().sum() == 0);
}

TEST_CASE("rank histogram chi-square uniformity under the null") {
  CounterRng rng(48);
  const int trials = 1000, chains = 2, draws_per = 200, bins = 20;
  const double q999 = 43.82;  // chi-square 0.999 quantile, 19 dof
  const double expected = static_cast<double>(draws_per) / bins;
  int ok = 0;
  Eigen::MatrixXd draws(chains, draws_per);
  for (int t = 0; t < trials; ++t) {
    for (int c = 0; c < chains; ++c)
      for (int d = 0; d < draws_per; ++d) draws(c, d) = rng.normal();
    const Eigen::MatrixXi hist = rank_histogram(draws, bins);
    bool all_uniform = true;
    for (int c = 0; c < chains; ++c) {
      double chi2 = 0.0;
      for (int b = 0; b < bins; ++b)
        chi2 += (hist(c, b) - expected) * (hist(c, b) - expected) / expected;
      all_uniform = all_uniform && chi2 < q999;
    }
    ok += all_uniform;
  }
  CHECK(ok >= 990);
}

TEST_CASE("ess of iid draws is close to the draw count") {
  CounterRng rng(49);
  Eigen::MatrixXd draws(4, 5000);
  for (int c = 0; c < 4; ++c)
    for (int d = 0; d < 5000; ++d) draws(c, d) = rng.normal();
  const double e = ess(draws);
  CHECK(e > 0.9 * 20000);
  CHECK(e < 1.1 * 20000);
}

TEST_CASE("ess of an ar(1) chain matches the closed form") {
  const double phi = 0.9;
  CounterRng rng(50);
  const int n = 20000;
  Eigen::MatrixXd draws(4, n);
  for (int c = 0; c < 4; ++c) {
    double x = 0.0;
    for (int d = 0; d < n; ++d) {
      x = phi * x + std::sqrt(1.0 - phi * phi) * rng.normal();
      draws(c, d) = x;
    }
  }
  const double expected = 4.0 * n * (1.0 - phi) / (1.0 + phi);
  const double e = ess(draws);
  CHECK(e > 0.8 * expected);
  CHECK(e < 1.2 * expected);
}

TEST_CASE("ess of a constant chain reports the sentinel minimum") {
  const Eigen::MatrixXd draws = Eigen::MatrixXd::Constant(2, 100, 3.0);
  CHECK(ess(draws) == 1.0);
}

TEST_CASE("diagnose aggregates over parameters") {
  CounterRng rng(51);
  PosteriorSamples samples;
  samples.param_names = {"a", "b"};
  for (int c = 0; c < 4; ++c) {
    ChainSamples chain;
    chain.draws.resize(500, 2);
    for (int d = 0; d < 500; ++d) {
      chain.draws(d, 0) = rng.normal();
      chain.draws(d, 1) = rng.normal(5.0, 2.0);
    }
    chain.stats.resize(500);
    samples.chains.push_back(std::move(chain));
  }
  const ConvergenceReport report = diagnose(samples);
  REQUIRE(report.params.size() == 2);
  CHECK(report.params[0].name == "a");
  CHECK(report.max_r_hat < 1.02);
  for (const auto& p : report.params) {
    CHECK(p.r_hat < 1.02);
    CHECK(p.ess > 1000.0);
    CHECK(p.rank_hist.rows() == 4);
    CHECK(p.rank_hist.row(0).sum() == 500);
  }
  const std::string json = to_json(report);
  CHECK(json.find("max_r_hat") != std::string::npos);
}

TEST_CASE("diagnostics preconditions") {
  Eigen::MatrixXd one_chain(1, 100);
  one_chain.setZero();
  CHECK_THROWS_AS(r_hat(one_chain), precondition_error);
  Eigen::MatrixXd short_chains(2, 1);
  short_chains.setZero();
  CHECK_THROWS_AS(r_hat(short_chains), precondition_error);
}
