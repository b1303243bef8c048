#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nvh/errors.hpp"
#include "nvh/rng.hpp"

namespace nvh {

/// Differentiable un-normalized log density. logp_grad fills `grad` (resized
/// by the callee if needed) and returns the log density.
struct TargetDensity {
  Eigen::Index dimension = 0;
  std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)> logp_grad;
};

struct SamplerConfig {
  int chains = 4;
  int draws = 10000;
  int warmup = 2000;
  double target_accept = 0.8;
  int max_tree_depth = 10;
  std::uint64_t seed = 0;
  double init_jitter = 2.0;  // uniform(-j, j) around the center, per coordinate
  bool parallel = true;
};

struct DrawStats {
  double accept_stat = 0.0;
  double energy = 0.0;
  int tree_depth = 0;
  bool divergent = false;
};

struct ChainSamples {
  Eigen::MatrixXd draws;  // draws x dimension, post-warmup only
  std::vector<DrawStats> stats;
  double step_size = 0.0;
  int divergences = 0;
};

struct PosteriorSamples {
  std::vector<ChainSamples> chains;
  std::vector<std::string> param_names;
  int warmup = 0;
  std::uint64_t seed = 0;

  int num_chains() const { return static_cast<int>(chains.size()); }
  int num_draws() const {
    return chains.empty() ? 0 : static_cast<int>(chains.front().draws.rows());
  }
  Eigen::Index dimension() const {
    return chains.empty() ? 0 : chains.front().draws.cols();
  }
  /// One parameter as a chains x draws matrix.
  Eigen::MatrixXd parameter_matrix(int param) const;
  /// All chains stacked: (chains * draws) x dimension.
  Eigen::MatrixXd pooled() const;
  int total_divergences() const;
};

/// One leapfrog step of H(q, p) = -logp(q) + |p|^2 / 2.
std::pair<Eigen::VectorXd, Eigen::VectorXd> leapfrog(
    const Eigen::VectorXd& q, const Eigen::VectorXd& p, double eps,
    const TargetDensity& target);

struct NutsStats {
  int tree_depth = 0;
  bool divergent = false;
  double accept_stat = 0.0;
  int n_leapfrog = 0;
  double energy = 0.0;
};

/// One No-U-Turn transition (multinomial variant). The trajectory doubles
/// until a U-turn, a divergence (energy error > 1000) or until the depth-
/// max_tree_depth doubling completes; a fresh momentum is drawn internally.
/// max_depth = 0 degenerates to a single leapfrog step with a Metropolis-style
/// multinomial accept.
Eigen::VectorXd nuts_draw(const Eigen::VectorXd& q, double eps,
                          const TargetDensity& target, int max_depth,
                          CounterRng& rng, NutsStats& stats);

/// Dual-averaging step-size controller (warmup only).
class DualAveraging {
 public:
  DualAveraging(double initial_eps, double target_accept);
  void update(double accept_prob);
  /// Exploration step size for the next warmup iteration.
  double eps() const { return eps_; }
  /// Averaged step size, frozen at the end of warmup.
  double adapted_eps() const;

 private:
  static constexpr double gamma_ = 0.05;
  static constexpr double t0_ = 10.0;
  static constexpr double kappa_ = 0.75;
  double mu_;
  double target_;
  double log_eps_;
  double log_eps_bar_ = 0.0;
  double h_bar_ = 0.0;
  int m_ = 0;
  double eps_;
};

/// Replay a warmup acceptance history through dual averaging and return the
/// frozen step size.
double adapt_step_size(std::span<const double> accept_history,
                       double target_accept, double initial_eps = 1.0);

/// Crude step-size search: double/halve until the one-step acceptance
/// probability crosses 1/2.
double find_initial_step_size(const Eigen::VectorXd& q,
                              const TargetDensity& target, CounterRng& rng);

/// Run `config.chains` independent NUTS chains (jittered initialization,
/// dual-averaging warmup, post-warmup draws only). Chains may run on threads;
/// results are deterministic in (seed, chain index) regardless of scheduling.
PosteriorSamples run_chains(const TargetDensity& target,
                            const SamplerConfig& config,
                            const Eigen::VectorXd& init_center = {});

/// Columnar draw storage: chain, draw, parameters, sampler statistics.
void write_draws_csv(std::ostream& out, const PosteriorSamples& samples);
PosteriorSamples read_draws_csv(std::istream& in);

}  // namespace nvh
