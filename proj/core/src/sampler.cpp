#include "nvh/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <istream>
#include <limits>
#include <ostream>
#include <thread>

#include "nvh/io.hpp"
#include "nvh/stats.hpp"

namespace nvh {

namespace {

constexpr double kDivergenceThreshold = 1000.0;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Phase-space state carrying the gradient so one leapfrog step costs a
/// single density evaluation.
struct PhasePoint {
  Eigen::VectorXd q;
  Eigen::VectorXd p;
  double logp = 0.0;
  Eigen::VectorXd grad;
};

double evaluate(const TargetDensity& target, PhasePoint& s) {
  s.grad.resize(target.dimension);
  s.logp = target.logp_grad(s.q, s.grad);
  return s.logp;
}

double hamiltonian(const PhasePoint& s) {
  return -s.logp + 0.5 * s.p.squaredNorm();
}

void leapfrog_inplace(PhasePoint& s, double eps, const TargetDensity& target) {
  s.p += 0.5 * eps * s.grad;
  s.q += eps * s.p;
  evaluate(target, s);
  s.p += 0.5 * eps * s.grad;
}

struct Subtree {
  PhasePoint begin;  // state adjacent to the edge the subtree grew from
  PhasePoint end;    // state farthest along the integration direction
  Eigen::VectorXd q_prop;
  double log_sum_weight = kNegInf;
  bool stop = false;  // divergence or internal U-turn; subtree must not merge
  bool divergent = false;
};

bool u_turn(const PhasePoint& begin, const PhasePoint& end, int dir) {
  const Eigen::VectorXd span = dir * (end.q - begin.q);
  return span.dot(begin.p) < 0.0 || span.dot(end.p) < 0.0;
}

Subtree build_tree(int depth, const PhasePoint& from, int dir, double eps,
                   double h0, const TargetDensity& target, CounterRng& rng,
                   double& sum_metro, int& n_leapfrog) {
  if (depth == 0) {
    Subtree leaf;
    leaf.begin = from;
    leapfrog_inplace(leaf.begin, dir * eps, target);
    leaf.end = leaf.begin;
    leaf.q_prop = leaf.begin.q;
    const double h = hamiltonian(leaf.begin);
    ++n_leapfrog;
    if (!std::isfinite(h)) {
      leaf.divergent = true;
      leaf.log_sum_weight = kNegInf;
    } else {
      const double energy_error = h - h0;
      leaf.divergent = energy_error > kDivergenceThreshold;
      leaf.log_sum_weight = -energy_error;
      sum_metro += std::min(1.0, std::exp(-energy_error));
    }
    leaf.stop = leaf.divergent;
    return leaf;
  }

  Subtree left = build_tree(depth - 1, from, dir, eps, h0, target, rng,
                            sum_metro, n_leapfrog);
  if (left.stop) return left;
  Subtree right = build_tree(depth - 1, left.end, dir, eps, h0, target, rng,
                             sum_metro, n_leapfrog);

  Subtree merged;
  merged.begin = std::move(left.begin);
  merged.end = std::move(right.end);
  merged.log_sum_weight = logaddexp(left.log_sum_weight, right.log_sum_weight);
  const double take_right =
      std::exp(right.log_sum_weight - merged.log_sum_weight);
  merged.q_prop = rng.uniform() < take_right ? std::move(right.q_prop)
                                             : std::move(left.q_prop);
  merged.divergent = right.divergent;
  merged.stop = right.stop || u_turn(merged.begin, merged.end, dir);
  return merged;
}

}  // namespace

std::pair<Eigen::VectorXd, Eigen::VectorXd> leapfrog(
    const Eigen::VectorXd& q, const Eigen::VectorXd& p, double eps,
    const TargetDensity& target) {
  PhasePoint s{q, p, 0.0, {}};
  evaluate(target, s);
  leapfrog_inplace(s, eps, target);
  return {std::move(s.q), std::move(s.p)};
}

Eigen::VectorXd nuts_draw(const Eigen::VectorXd& q, double eps,
                          const TargetDensity& target, int max_depth,
                          CounterRng& rng, NutsStats& stats) {
  PhasePoint init;
  init.q = q;
  init.p.resize(target.dimension);
  for (Eigen::Index i = 0; i < target.dimension; ++i) init.p[i] = rng.normal();
  evaluate(target, init);
  if (!std::isfinite(init.logp))
    throw init_error("nuts_draw: non-finite log density at the initial point");

  const double h0 = hamiltonian(init);
  PhasePoint forward = init, backward = init;
  Eigen::VectorXd selected = q;
  double log_sum_weight = 0.0;  // weight 1 for the initial state
  double sum_metro = 0.0;
  int n_leapfrog = 0;

  stats = NutsStats{};
  stats.energy = h0;

  for (int depth = 0; depth <= max_depth; ++depth) {
    const int dir = rng.uniform() < 0.5 ? -1 : 1;
    Subtree sub = build_tree(depth, dir > 0 ? forward : backward, dir, eps, h0,
                             target, rng, sum_metro, n_leapfrog);
    if (dir > 0)
      forward = sub.end;
    else
      backward = sub.end;

    if (sub.stop) {
      stats.divergent = stats.divergent || sub.divergent;
      break;
    }
    // biased progressive sampling toward the fresh half of the trajectory
    const double take_new =
        std::exp(std::min(0.0, sub.log_sum_weight - log_sum_weight));
    if (rng.uniform() < take_new) selected = sub.q_prop;
    log_sum_weight = logaddexp(log_sum_weight, sub.log_sum_weight);
    stats.tree_depth = depth + 1;

    const Eigen::VectorXd span = forward.q - backward.q;
    if (span.dot(backward.p) < 0.0 || span.dot(forward.p) < 0.0) break;
  }

  stats.n_leapfrog = n_leapfrog;
  stats.accept_stat = n_leapfrog > 0 ? sum_metro / n_leapfrog : 0.0;
  return selected;
}

DualAveraging::DualAveraging(double initial_eps, double target_accept)
    : mu_(std::log(10.0 * initial_eps)),
      target_(target_accept),
      log_eps_(std::log(initial_eps)),
      eps_(initial_eps) {}

void DualAveraging::update(double accept_prob) {
  const double a = std::clamp(accept_prob, 0.0, 1.0);
  ++m_;
  const double w = 1.0 / (m_ + t0_);
  h_bar_ = (1.0 - w) * h_bar_ + w * (target_ - a);
  log_eps_ = mu_ - std::sqrt(static_cast<double>(m_)) / gamma_ * h_bar_;
  const double v = std::pow(static_cast<double>(m_), -kappa_);
  log_eps_bar_ = v * log_eps_ + (1.0 - v) * log_eps_bar_;
  eps_ = std::exp(log_eps_);
}

double DualAveraging::adapted_eps() const {
  return m_ > 0 ? std::exp(log_eps_bar_) : eps_;
}

double adapt_step_size(std::span<const double> accept_history,
                       double target_accept, double initial_eps) {
  DualAveraging da(initial_eps, target_accept);
  for (double a : accept_history) da.update(a);
  return da.adapted_eps();
}

double find_initial_step_size(const Eigen::VectorXd& q,
                              const TargetDensity& target, CounterRng& rng) {
  PhasePoint init;
  init.q = q;
  init.p.resize(target.dimension);
  for (Eigen::Index i = 0; i < target.dimension; ++i) init.p[i] = rng.normal();
  evaluate(target, init);
  if (!std::isfinite(init.logp))
    throw init_error("find_initial_step_size: non-finite log density");
  const double h0 = hamiltonian(init);

  double eps = 1.0;
  auto log_ratio = [&](double step) {
    PhasePoint s = init;
    leapfrog_inplace(s, step, target);
    const double h = hamiltonian(s);
    return std::isfinite(h) ? h0 - h : kNegInf;
  };

  const double direction = log_ratio(eps) > std::log(0.5) ? 1.0 : -1.0;
  for (int i = 0; i < 60; ++i) {
    eps *= direction > 0 ? 2.0 : 0.5;
    const double r = log_ratio(eps);
    if (direction > 0 ? r <= std::log(0.5) : r > std::log(0.5)) break;
  }
  return eps;
}

namespace {

ChainSamples run_single_chain(const TargetDensity& target,
                              const SamplerConfig& config,
                              const Eigen::VectorXd& center, int chain_index) {
  CounterRng rng =
      CounterRng(config.seed).substream(static_cast<std::uint64_t>(chain_index));

  Eigen::VectorXd q(target.dimension);
  Eigen::VectorXd grad(target.dimension);
  bool initialized = false;
  for (int attempt = 0; attempt < 100 && !initialized; ++attempt) {
    for (Eigen::Index i = 0; i < target.dimension; ++i)
      q[i] = center[i] + (config.init_jitter > 0.0
                              ? rng.uniform(-config.init_jitter,
                                            config.init_jitter)
                              : 0.0);
    try {
      initialized = std::isfinite(target.logp_grad(q, grad));
    } catch (const std::runtime_error&) {
      initialized = false;
    }
    if (config.init_jitter <= 0.0) break;
  }
  if (!initialized)
    throw init_error("chain " + std::to_string(chain_index) +
                     ": no finite starting point found");

  double eps = find_initial_step_size(q, target, rng);
  DualAveraging da(eps, config.target_accept);
  NutsStats stats;
  for (int w = 0; w < config.warmup; ++w) {
    q = nuts_draw(q, da.eps(), target, config.max_tree_depth, rng, stats);
    da.update(stats.accept_stat);
  }
  if (config.warmup > 0) eps = da.adapted_eps();

  ChainSamples chain;
  chain.step_size = eps;
  chain.draws.resize(config.draws, target.dimension);
  chain.stats.resize(config.draws);
  for (int d = 0; d < config.draws; ++d) {
    q = nuts_draw(q, eps, target, config.max_tree_depth, rng, stats);
    chain.draws.row(d) = q;
    chain.stats[d] = DrawStats{stats.accept_stat, stats.energy,
                               stats.tree_depth, stats.divergent};
    if (stats.divergent) ++chain.divergences;
  }
  return chain;
}

}  // namespace

PosteriorSamples run_chains(const TargetDensity& target,
                            const SamplerConfig& config,
                            const Eigen::VectorXd& init_center) {
  if (target.dimension <= 0 || !target.logp_grad)
    throw config_error("run_chains: target density is not fully specified");
  if (config.chains < 1 || config.draws < 1 || config.warmup < 0)
    throw config_error("run_chains: invalid chains/draws/warmup");
  if (!(config.target_accept > 0.0 && config.target_accept < 1.0))
    throw config_error("run_chains: target_accept must lie in (0, 1)");

  Eigen::VectorXd center = init_center;
  if (center.size() == 0) center = Eigen::VectorXd::Zero(target.dimension);
  if (center.size() != target.dimension)
    throw dimension_error("run_chains: init_center has wrong dimension");

  PosteriorSamples samples;
  samples.warmup = config.warmup;
  samples.seed = config.seed;
  samples.chains.resize(config.chains);
  for (Eigen::Index i = 0; i < target.dimension; ++i)
    samples.param_names.push_back("theta[" + std::to_string(i) + "]");

  if (config.parallel && config.chains > 1) {
    std::vector<std::exception_ptr> failures(config.chains);
    std::vector<std::thread> workers;
    workers.reserve(config.chains);
    for (int c = 0; c < config.chains; ++c) {
      workers.emplace_back([&, c]() {
        try {
          samples.chains[c] = run_single_chain(target, config, center, c);
        } catch (...) {
          failures[c] = std::current_exception();
        }
      });
    }
    for (auto& w : workers) w.join();
    for (int c = 0; c < config.chains; ++c)
      if (failures[c]) std::rethrow_exception(failures[c]);
  } else {
    for (int c = 0; c < config.chains; ++c)
      samples.chains[c] = run_single_chain(target, config, center, c);
  }
  return samples;
}

Eigen::MatrixXd PosteriorSamples::parameter_matrix(int param) const {
  Eigen::MatrixXd out(num_chains(), num_draws());
  for (int c = 0; c < num_chains(); ++c)
    out.row(c) = chains[c].draws.col(param).transpose();
  return out;
}

Eigen::MatrixXd PosteriorSamples::pooled() const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(num_chains()) * num_draws(),
                      dimension());
  for (int c = 0; c < num_chains(); ++c)
    out.middleRows(static_cast<Eigen::Index>(c) * num_draws(), num_draws()) =
        chains[c].draws;
  return out;
}

int PosteriorSamples::total_divergences() const {
  int total = 0;
  for (const auto& c : chains) total += c.divergences;
  return total;
}

void write_draws_csv(std::ostream& out, const PosteriorSamples& samples) {
  out << "chain,draw";
  for (const auto& name : samples.param_names) out << ',' << name;
  out << ",accept_stat,tree_depth,energy,divergent\n";
  for (int c = 0; c < samples.num_chains(); ++c) {
    const auto& chain = samples.chains[c];
    for (int d = 0; d < samples.num_draws(); ++d) {
      out << c << ',' << d;
      for (Eigen::Index j = 0; j < samples.dimension(); ++j)
        out << ',' << format_double(chain.draws(d, j));
      const auto& s = chain.stats[d];
      out << ',' << format_double(s.accept_stat) << ',' << s.tree_depth << ','
          << format_double(s.energy) << ',' << (s.divergent ? 1 : 0) << '\n';
    }
  }
}

PosteriorSamples read_draws_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    throw parse_error("draws csv: missing header");
  const auto header = split_csv_line(line);
  if (header.size() < 7 || header[0] != "chain" || header[1] != "draw")
    throw schema_error("draws csv: unexpected header");
  const std::size_t dim = header.size() - 6;

  PosteriorSamples samples;
  samples.param_names.assign(header.begin() + 2, header.begin() + 2 + dim);

  std::vector<std::vector<Eigen::VectorXd>> rows;
  std::vector<std::vector<DrawStats>> stats;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw parse_error("draws csv: ragged row");
    const auto chain = static_cast<std::size_t>(std::strtol(fields[0].c_str(), nullptr, 10));
    if (chain >= rows.size()) {
      rows.resize(chain + 1);
      stats.resize(chain + 1);
    }
    Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
    for (std::size_t j = 0; j < dim; ++j)
      v[static_cast<Eigen::Index>(j)] = std::strtod(fields[2 + j].c_str(), nullptr);
    rows[chain].push_back(std::move(v));
    DrawStats s;
    s.accept_stat = std::strtod(fields[2 + dim].c_str(), nullptr);
    s.tree_depth = static_cast<int>(std::strtol(fields[3 + dim].c_str(), nullptr, 10));
    s.energy = std::strtod(fields[4 + dim].c_str(), nullptr);
    s.divergent = fields[5 + dim] == "1";
    stats[chain].push_back(s);
  }

  for (std::size_t c = 0; c < rows.size(); ++c) {
    ChainSamples chain;
    chain.draws.resize(static_cast<Eigen::Index>(rows[c].size()),
                       static_cast<Eigen::Index>(dim));
    for (std::size_t d = 0; d < rows[c].size(); ++d)
      chain.draws.row(static_cast<Eigen::Index>(d)) = rows[c][d];
    chain.stats = stats[c];
    for (const auto& s : chain.stats)
      if (s.divergent) ++chain.divergences;
    samples.chains.push_back(std::move(chain));
  }
  return samples;
}

}  // namespace nvh
