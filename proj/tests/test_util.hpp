#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "nvh/sampler.hpp"

namespace nvhtest {

/// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  TempDir() {
    auto pattern = (std::filesystem::temp_directory_path() / "nvhtest-XXXXXX")
                       .string();
    if (!mkdtemp(pattern.data())) throw std::runtime_error("mkdtemp failed");
    path_ = pattern;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const {
    return (path_ / name).string();
  }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

/// Kolmogorov-Smirnov statistic of a sample against a CDF.
inline double ks_statistic(std::vector<double> sample,
                           const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const auto n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, std::abs((i + 1) / n - f));
    d = std::max(d, std::abs(f - i / n));
  }
  return d;
}

inline nvh::TargetDensity std_normal_target(int dim) {
  nvh::TargetDensity t;
  t.dimension = dim;
  t.logp_grad = [](const Eigen::VectorXd& q, Eigen::VectorXd& grad) {
    grad = -q;
    return -0.5 * q.squaredNorm();
  };
  return t;
}

/// Bivariate normal with unit variances and correlation rho.
inline nvh::TargetDensity correlated_normal_target(double rho) {
  nvh::TargetDensity t;
  t.dimension = 2;
  const double det = 1.0 - rho * rho;
  t.logp_grad = [rho, det](const Eigen::VectorXd& q, Eigen::VectorXd& grad) {
    grad.resize(2);
    grad[0] = -(q[0] - rho * q[1]) / det;
    grad[1] = -(q[1] - rho * q[0]) / det;
    return -0.5 * (q[0] * q[0] - 2.0 * rho * q[0] * q[1] + q[1] * q[1]) / det;
  };
  return t;
}

/// Central finite-difference gradient with per-coordinate relative step.
inline Eigen::VectorXd fd_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double rel_step = 1e-6) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = rel_step * std::max(1.0, std::abs(x[i]));
    Eigen::VectorXd hi = x, lo = x;
    hi[i] += h;
    lo[i] -= h;
    g[i] = (f(hi) - f(lo)) / (2.0 * h);
  }
  return g;
}

inline double max_rel_error(const Eigen::VectorXd& got,
                            const Eigen::VectorXd& want) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < got.size(); ++i)
    worst = std::max(worst, std::abs(got[i] - want[i]) /
                                std::max(1.0, std::abs(want[i])));
  return worst;
}

}  // namespace nvhtest
