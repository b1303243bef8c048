#include "nvh/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "nvh/rng.hpp"
#include "nvh/stats.hpp"

namespace nvh {

namespace {

struct DataSummary {
  double x_mean, x_sd;   // transformed frequency
  double w_mean, w_sd;   // SPL minus physical term
  double t_min, t_max;   // raw transformed-frequency range
};

DataSummary summarize(const Dataset& data, const SurrogateSpec& spec,
                      bool subtract_physical) {
  if (data.size() == 0)
    throw precondition_error("bayes model: empty dataset");
  std::vector<double> t(data.size()), w(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    t[i] = transform_frequency(data[i].frequency_hz, spec);
    w[i] = data[i].spl_db -
           (subtract_physical
                ? physical_aero_term(data[i].speed_kmph, spec, 1.0)
                : 0.0);
  }
  DataSummary s;
  s.t_min = *std::min_element(t.begin(), t.end());
  s.t_max = *std::max_element(t.begin(), t.end());
  s.x_mean = mean(t);
  s.x_sd = t.size() > 1 ? sample_sd(t) : 0.0;
  if (!(s.x_sd > 0.0)) s.x_sd = 1.0;
  s.w_mean = mean(w);
  s.w_sd = w.size() > 1 ? sample_sd(w) : 0.0;
  if (!(s.w_sd > 0.0)) s.w_sd = 1.0;
  return s;
}

std::vector<double> spread_locations(double lo, double hi, int n) {
  std::vector<double> loc(n);
  if (n == 1) {
    loc[0] = 0.5 * (lo + hi);
  } else {
    for (int k = 0; k < n; ++k) loc[k] = lo + (hi - lo) * k / (n - 1);
  }
  return loc;
}

double binomial(int n, int k) {
  double out = 1.0;
  for (int i = 0; i < k; ++i) out = out * (n - i) / (i + 1);
  return out;
}

void check_normal_prior(const NormalPrior& p, const char* what) {
  if (!(p.sd > 0.0))
    throw config_error(std::string("prior sd for ") + what +
                       " must be positive");
}

}  // namespace

PriorSpec default_priors(const Dataset& data, const SurrogateSpec& spec) {
  const DataSummary s = summarize(data, spec, spec.family != Family::Tire);
  PriorSpec priors;
  if (spec.family == Family::AeroPolynomial || spec.family == Family::Tire)
    priors.poly.assign(spec.m + 1, NormalPrior{0.0, 10.0});
  if (spec.family == Family::AeroGaussian || spec.family == Family::Tire) {
    const int n = std::max(spec.n, 1);
    const double range = std::max(s.t_max - s.t_min, 1e-3) / s.x_sd;
    priors.intercept = NormalPrior{0.0, 10.0};
    priors.amp.assign(spec.n, NormalPrior{0.0, 10.0});
    priors.loc.clear();
    const auto spread = spread_locations((s.t_min - s.x_mean) / s.x_sd,
                                         (s.t_max - s.x_mean) / s.x_sd, spec.n);
    for (double b : spread) priors.loc.push_back(NormalPrior{b, range / n});
    priors.sigma_c = range / (2.0 * n);
    priors.mu_c_hyper = NormalPrior{range / n, range / n};
  }
  priors.variance = InvGamma{2.0, 2.0};
  return priors;
}

BayesModel BayesModel::bm1(const Dataset& data, const SurrogateSpec& spec,
                           const PriorSpec& priors) {
  if (spec.family != Family::AeroPolynomial)
    throw spec_error("bm1 requires the aero_poly family");
  if (priors.poly.size() != static_cast<std::size_t>(spec.m + 1))
    throw config_error("bm1: need one polynomial prior per coefficient (" +
                       std::to_string(spec.m + 1) + ")");
  for (const auto& p : priors.poly) check_normal_prior(p, "poly");
  if (!(priors.variance.shape > 0.0 && priors.variance.rate > 0.0))
    throw config_error("bm1: InvGamma prior parameters must be positive");

  BayesModel m;
  m.kind_ = BayesKind::BM1;
  m.spec_ = spec;
  m.priors_ = priors;
  const DataSummary s = summarize(data, spec, true);
  m.x_mean_ = s.x_mean;
  m.x_sd_ = s.x_sd;
  m.w_mean_ = s.w_mean;
  m.w_sd_ = s.w_sd;

  const auto n = static_cast<Eigen::Index>(data.size());
  m.design_.resize(n, spec.m + 1);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& r = data[i];
    m.y_.push_back(r.spl_db);
    m.speed_.push_back(r.speed_kmph);
    m.freq_.push_back(r.frequency_hz);
    const double phi = physical_aero_term(r.speed_kmph, spec, 1.0);
    m.phi_.push_back(phi);
    const double x =
        (transform_frequency(r.frequency_hz, spec) - s.x_mean) / s.x_sd;
    m.x_.push_back(x);
    m.w_.push_back((r.spl_db - phi - s.w_mean) / s.w_sd);
    double power = 1.0;
    for (int k = 0; k <= spec.m; ++k) {
      m.design_(static_cast<Eigen::Index>(i), k) = power;
      power *= x;
    }
  }
  m.dimension_ = spec.m + 2;
  return m;
}

BayesModel BayesModel::bm2(const Dataset& data, const SurrogateSpec& spec,
                           const PriorSpec& priors, bool ordered_loc) {
  if (spec.family != Family::AeroGaussian)
    throw spec_error("bm2 requires the aero_gauss family");
  if (spec.n < 1) throw config_error("bm2: need at least one Gaussian basis");
  if (priors.amp.size() != static_cast<std::size_t>(spec.n) ||
      priors.loc.size() != static_cast<std::size_t>(spec.n))
    throw config_error("bm2: need one amp and loc prior per basis (" +
                       std::to_string(spec.n) + ")");
  check_normal_prior(priors.intercept, "intercept");
  for (const auto& p : priors.amp) check_normal_prior(p, "amp");
  for (const auto& p : priors.loc) check_normal_prior(p, "loc");
  check_normal_prior(priors.mu_c_hyper, "mu_c");
  if (!(priors.sigma_c > 0.0))
    throw config_error("bm2: sigma_c must be positive");
  if (!(priors.variance.shape > 0.0 && priors.variance.rate > 0.0))
    throw config_error("bm2: InvGamma prior parameters must be positive");

  BayesModel m;
  m.kind_ = BayesKind::BM2;
  m.spec_ = spec;
  m.priors_ = priors;
  m.ordered_loc_ = ordered_loc;
  const DataSummary s = summarize(data, spec, true);
  m.x_mean_ = s.x_mean;
  m.x_sd_ = s.x_sd;
  m.w_mean_ = s.w_mean;
  m.w_sd_ = s.w_sd;

  for (const auto& r : data) {
    m.y_.push_back(r.spl_db);
    m.speed_.push_back(r.speed_kmph);
    m.freq_.push_back(r.frequency_hz);
    const double phi = physical_aero_term(r.speed_kmph, spec, 1.0);
    m.phi_.push_back(phi);
    m.x_.push_back(
        (transform_frequency(r.frequency_hz, spec) - s.x_mean) / s.x_sd);
    m.w_.push_back((r.spl_db - phi - s.w_mean) / s.w_sd);
  }

  m.bands_ = m.freq_;
  std::sort(m.bands_.begin(), m.bands_.end());
  m.bands_.erase(std::unique(m.bands_.begin(), m.bands_.end()),
                 m.bands_.end());
  for (double f : m.freq_) {
    const auto it = std::lower_bound(m.bands_.begin(), m.bands_.end(), f);
    m.band_.push_back(static_cast<int>(it - m.bands_.begin()));
  }

  m.dimension_ = 2 + 3 * static_cast<Eigen::Index>(spec.n) +
                 static_cast<Eigen::Index>(m.bands_.size());
  return m;
}

BayesModel build_bm1(const Dataset& data, const SurrogateSpec& spec,
                     const PriorSpec& priors) {
  return BayesModel::bm1(data, spec, priors);
}

BayesModel build_bm2(const Dataset& data, const SurrogateSpec& spec,
                     const PriorSpec& priors, bool ordered_loc) {
  return BayesModel::bm2(data, spec, priors, ordered_loc);
}

double BayesModel::eval(const Eigen::VectorXd& u, Eigen::VectorXd* grad,
                        double* loglik_out) const {
  if (u.size() != dimension_)
    throw dimension_error("bayes model: wrong parameter dimension");
  if (grad) grad->setZero(dimension_);
  const auto n_obs = static_cast<Eigen::Index>(y_.size());

  double loglik = 0.0, logprior = 0.0, jacobian = 0.0;

  if (kind_ == BayesKind::BM1) {
    const int m = spec_.m;
    const Eigen::VectorXd c = u.head(m + 1);
    const double tau = u[m + 1];
    const double s2 = std::exp(tau);

    const Eigen::Map<const Eigen::VectorXd> w(w_.data(), n_obs);
    const Eigen::VectorXd resid = w - design_ * c;
    loglik = -0.5 * n_obs * std::log(2.0 * std::numbers::pi * s2) -
             resid.squaredNorm() / (2.0 * s2);
    if (grad) {
      grad->head(m + 1) = design_.transpose() * resid / s2;
      (*grad)[m + 1] += -0.5 * n_obs + resid.squaredNorm() / (2.0 * s2);
    }

    for (int k = 0; k <= m; ++k) {
      const auto& p = priors_.poly[k];
      logprior += normal_logpdf(c[k], p.mean, p.sd * p.sd);
      if (grad) (*grad)[k] += (p.mean - c[k]) / (p.sd * p.sd);
    }
    logprior += inv_gamma_logpdf(s2, priors_.variance.shape,
                                 priors_.variance.rate);
    if (grad)
      (*grad)[m + 1] +=
          -(priors_.variance.shape + 1.0) + priors_.variance.rate / s2;

    jacobian = tau;
    if (grad) (*grad)[m + 1] += 1.0;
  } else {
    const int n = spec_.n;
    const auto n_bands = static_cast<int>(bands_.size());
    const double alpha = u[0];
    const auto a = u.segment(1, n);
    const auto lam = u.segment(1 + n, n);
    const auto omega = u.segment(1 + 2 * n, n);
    const auto tau = u.segment(1 + 3 * n, n_bands);
    const double mu_c = u[1 + 3 * n + n_bands];

    Eigen::VectorXd b(n), c(n), s2(n_bands);
    if (ordered_loc_) {
      b[0] = lam[0];
      for (int k = 1; k < n; ++k) {
        b[k] = b[k - 1] + std::exp(lam[k]);
        jacobian += lam[k];
      }
    } else {
      b = lam;
    }
    for (int k = 0; k < n; ++k) {
      c[k] = std::exp(omega[k]);
      jacobian += omega[k];
    }
    for (int j = 0; j < n_bands; ++j) {
      s2[j] = std::exp(tau[j]);
      jacobian += tau[j];
    }

    double g_alpha = 0.0, g_mu_c = 0.0;
    Eigen::VectorXd g_a = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd g_b = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd g_c = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd g_tau = Eigen::VectorXd::Zero(n_bands);

    for (Eigen::Index i = 0; i < n_obs; ++i) {
      const double x = x_[i];
      const double s2i = s2[band_[i]];
      double basis = 0.0;
      for (int k = 0; k < n; ++k) {
        const double z = x - b[k];
        basis += a[k] * std::exp(-z * z / (c[k] * c[k]));
      }
      const double d = w_[i] - alpha - basis;
      loglik +=
          -0.5 * std::log(2.0 * std::numbers::pi * s2i) - d * d / (2.0 * s2i);
      if (grad) {
        const double coef = d / s2i;
        g_alpha += coef;
        for (int k = 0; k < n; ++k) {
          const double z = x - b[k];
          const double e = std::exp(-z * z / (c[k] * c[k]));
          g_a[k] += coef * e;
          g_b[k] += coef * a[k] * e * 2.0 * z / (c[k] * c[k]);
          g_c[k] += coef * a[k] * e * 2.0 * z * z / (c[k] * c[k] * c[k]);
        }
        g_tau[band_[i]] += -0.5 + d * d / (2.0 * s2i);
      }
    }

    // priors
    {
      const auto& p = priors_.intercept;
      logprior += normal_logpdf(alpha, p.mean, p.sd * p.sd);
      g_alpha += (p.mean - alpha) / (p.sd * p.sd);
    }
    for (int k = 0; k < n; ++k) {
      const auto& pa = priors_.amp[k];
      logprior += normal_logpdf(a[k], pa.mean, pa.sd * pa.sd);
      g_a[k] += (pa.mean - a[k]) / (pa.sd * pa.sd);
      const auto& pl = priors_.loc[k];
      logprior += normal_logpdf(b[k], pl.mean, pl.sd * pl.sd);
      g_b[k] += (pl.mean - b[k]) / (pl.sd * pl.sd);
      const double sc2 = priors_.sigma_c * priors_.sigma_c;
      logprior += normal_logpdf(c[k], mu_c, sc2);
      g_c[k] += (mu_c - c[k]) / sc2;
      g_mu_c += (c[k] - mu_c) / sc2;
    }
    {
      const auto& p = priors_.mu_c_hyper;
      logprior += normal_logpdf(mu_c, p.mean, p.sd * p.sd);
      g_mu_c += (p.mean - mu_c) / (p.sd * p.sd);
    }
    for (int j = 0; j < n_bands; ++j) {
      logprior += inv_gamma_logpdf(s2[j], priors_.variance.shape,
                                   priors_.variance.rate);
      g_tau[j] += -(priors_.variance.shape + 1.0) + priors_.variance.rate / s2[j];
    }

    if (grad) {
      (*grad)[0] = g_alpha;
      grad->segment(1, n) = g_a;
      if (ordered_loc_) {
        double suffix = 0.0;
        for (int k = n - 1; k >= 1; --k) {
          suffix += g_b[k];
          (*grad)[1 + n + k] = suffix * std::exp(lam[k]) + 1.0;
        }
        (*grad)[1 + n] = suffix + g_b[0];
      } else {
        grad->segment(1 + n, n) = g_b;
      }
      for (int k = 0; k < n; ++k)
        (*grad)[1 + 2 * n + k] = g_c[k] * c[k] + 1.0;
      for (int j = 0; j < n_bands; ++j)
        (*grad)[1 + 3 * n + j] = g_tau[j] + 1.0;
      (*grad)[1 + 3 * n + n_bands] = g_mu_c;
    }
  }

  if (loglik_out) *loglik_out = loglik;
  return loglik + logprior + jacobian;
}

TargetDensity BayesModel::target() const {
  TargetDensity t;
  t.dimension = dimension_;
  t.logp_grad = [this](const Eigen::VectorXd& u, Eigen::VectorXd& grad) {
    return eval(u, &grad, nullptr);
  };
  return t;
}

double BayesModel::logp(const Eigen::VectorXd& u) const {
  return eval(u, nullptr, nullptr);
}

double BayesModel::log_prior_jacobian(const Eigen::VectorXd& u) const {
  double loglik = 0.0;
  const double lp = eval(u, nullptr, &loglik);
  return lp - loglik;
}

Eigen::VectorXd BayesModel::constrain(const Eigen::VectorXd& u) const {
  if (u.size() != dimension_)
    throw dimension_error("constrain: wrong parameter dimension");
  Eigen::VectorXd out(dimension_);
  if (kind_ == BayesKind::BM1) {
    const int m = spec_.m;
    // poly coefficients in standardized x back to raw transformed frequency
    for (int j = 0; j <= m; ++j) {
      double acc = 0.0;
      for (int k = j; k <= m; ++k)
        acc += u[k] * binomial(k, j) * std::pow(-x_mean_, k - j) /
               std::pow(x_sd_, k);
      out[j] = w_sd_ * acc;
    }
    out[0] += w_mean_;
    out[m + 1] = w_sd_ * w_sd_ * std::exp(u[m + 1]);
  } else {
    const int n = spec_.n;
    const auto n_bands = static_cast<int>(bands_.size());
    out[0] = w_mean_ + w_sd_ * u[0];
    for (int k = 0; k < n; ++k) out[1 + k] = w_sd_ * u[1 + k];
    double prev = 0.0;
    for (int k = 0; k < n; ++k) {
      const double b =
          ordered_loc_ ? (k == 0 ? u[1 + n] : prev + std::exp(u[1 + n + k]))
                       : u[1 + n + k];
      prev = b;
      out[1 + n + k] = x_mean_ + x_sd_ * b;
    }
    for (int k = 0; k < n; ++k)
      out[1 + 2 * n + k] = x_sd_ * std::exp(u[1 + 2 * n + k]);
    for (int j = 0; j < n_bands; ++j)
      out[1 + 3 * n + j] = w_sd_ * w_sd_ * std::exp(u[1 + 3 * n + j]);
    out[1 + 3 * n + n_bands] = x_sd_ * u[1 + 3 * n + n_bands];
  }
  return out;
}

Eigen::VectorXd BayesModel::unconstrain(const Eigen::VectorXd& physical) const {
  if (physical.size() != dimension_)
    throw dimension_error("unconstrain: wrong parameter dimension");
  Eigen::VectorXd u(dimension_);
  if (kind_ == BayesKind::BM1) {
    const int m = spec_.m;
    for (int k = 0; k <= m; ++k) {
      double acc = 0.0;
      for (int j = k; j <= m; ++j)
        acc += physical[j] * binomial(j, k) * std::pow(x_mean_, j - k) *
               std::pow(x_sd_, k);
      if (k == 0) acc -= w_mean_;
      u[k] = acc / w_sd_;
    }
    u[m + 1] = to_unconstrained(physical[m + 1] / (w_sd_ * w_sd_));
  } else {
    const int n = spec_.n;
    const auto n_bands = static_cast<int>(bands_.size());
    u[0] = (physical[0] - w_mean_) / w_sd_;
    for (int k = 0; k < n; ++k) u[1 + k] = physical[1 + k] / w_sd_;
    std::vector<double> b(n);
    for (int k = 0; k < n; ++k)
      b[k] = (physical[1 + n + k] - x_mean_) / x_sd_;
    if (ordered_loc_) {
      u[1 + n] = b[0];
      for (int k = 1; k < n; ++k) {
        if (!(b[k] > b[k - 1]))
          throw domain_error("unconstrain: locations must be increasing");
        u[1 + n + k] = std::log(b[k] - b[k - 1]);
      }
    } else {
      for (int k = 0; k < n; ++k) u[1 + n + k] = b[k];
    }
    for (int k = 0; k < n; ++k)
      u[1 + 2 * n + k] = to_unconstrained(physical[1 + 2 * n + k] / x_sd_);
    for (int j = 0; j < n_bands; ++j)
      u[1 + 3 * n + j] =
          to_unconstrained(physical[1 + 3 * n + j] / (w_sd_ * w_sd_));
    u[1 + 3 * n + n_bands] = physical[1 + 3 * n + n_bands] / x_sd_;
  }
  return u;
}

std::vector<std::string> BayesModel::param_names() const {
  std::vector<std::string> names;
  if (kind_ == BayesKind::BM1) {
    for (int j = 0; j <= spec_.m; ++j)
      names.push_back("poly[" + std::to_string(j) + "]");
    names.push_back("sigma2_y");
  } else {
    names.push_back("intercept");
    for (int k = 0; k < spec_.n; ++k)
      names.push_back("amp[" + std::to_string(k) + "]");
    for (int k = 0; k < spec_.n; ++k)
      names.push_back("loc[" + std::to_string(k) + "]");
    for (int k = 0; k < spec_.n; ++k)
      names.push_back("width[" + std::to_string(k) + "]");
    for (std::size_t j = 0; j < bands_.size(); ++j)
      names.push_back("sigma2_y[" + std::to_string(j) + "]");
    names.push_back("mu_c");
  }
  return names;
}

PosteriorSamples BayesModel::constrain_samples(
    const PosteriorSamples& raw) const {
  if (raw.dimension() != dimension_)
    throw dimension_error("constrain_samples: dimension mismatch");
  PosteriorSamples out = raw;
  out.param_names = param_names();
  for (auto& chain : out.chains)
    for (Eigen::Index d = 0; d < chain.draws.rows(); ++d)
      chain.draws.row(d) = constrain(chain.draws.row(d).transpose()).transpose();
  return out;
}

void BayesModel::check_dimension(std::span<const double> physical) const {
  if (static_cast<Eigen::Index>(physical.size()) != dimension_)
    throw dimension_error("bayes model: physical draw has wrong dimension");
}

ParameterVector BayesModel::params_from_draw(
    std::span<const double> physical) const {
  check_dimension(physical);
  ParameterVector pv;
  if (kind_ == BayesKind::BM1) {
    pv.poly.assign(physical.begin(), physical.begin() + spec_.m + 1);
    pv.noise_sd = {std::sqrt(physical[spec_.m + 1])};
  } else {
    const int n = spec_.n;
    pv.b_scale = std::pow(10.0, physical[0] / 10.0);
    pv.amp.assign(physical.begin() + 1, physical.begin() + 1 + n);
    pv.loc.assign(physical.begin() + 1 + n, physical.begin() + 1 + 2 * n);
    pv.width.assign(physical.begin() + 1 + 2 * n,
                    physical.begin() + 1 + 3 * n);
    for (std::size_t j = 0; j < bands_.size(); ++j)
      pv.noise_sd.push_back(std::sqrt(physical[1 + 3 * n + j]));
  }
  return pv;
}

double BayesModel::mean_at(double speed_kmph, double frequency_hz,
                           std::span<const double> physical) const {
  check_dimension(physical);
  const double phi = physical_aero_term(speed_kmph, spec_, 1.0);
  const double t = transform_frequency(frequency_hz, spec_);
  if (kind_ == BayesKind::BM1) {
    return phi + poly_basis_eval(
                     t, std::span<const double>(physical.data(), spec_.m + 1));
  }
  const int n = spec_.n;
  double basis = 0.0;
  for (int k = 0; k < n; ++k) {
    const double z = (t - physical[1 + n + k]) / physical[1 + 2 * n + k];
    basis += physical[1 + k] * std::exp(-z * z);
  }
  return phi + physical[0] + basis;
}

double BayesModel::variance_at(double frequency_hz,
                               std::span<const double> physical,
                               bool nearest_band_fallback) const {
  check_dimension(physical);
  if (kind_ == BayesKind::BM1) return physical[spec_.m + 1];
  const auto it = std::lower_bound(bands_.begin(), bands_.end(), frequency_hz);
  std::size_t j;
  if (it != bands_.end() && *it == frequency_hz) {
    j = static_cast<std::size_t>(it - bands_.begin());
  } else if (nearest_band_fallback) {
    j = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t cand = 0; cand < bands_.size(); ++cand) {
      const double dist = std::abs(bands_[cand] - frequency_hz);
      if (dist < best) {
        best = dist;
        j = cand;
      }
    }
  } else {
    throw extrapolation_error("variance_at: frequency " +
                              std::to_string(frequency_hz) +
                              " Hz is not a fitted band");
  }
  return physical[1 + 3 * spec_.n + j];
}

double BayesModel::loglik_point(std::size_t i,
                                std::span<const double> physical) const {
  const double mu = mean_at(speed_[i], freq_[i], physical);
  const double s2 = kind_ == BayesKind::BM1
                        ? physical[spec_.m + 1]
                        : physical[1 + 3 * spec_.n + band_[i]];
  return normal_logpdf(y_[i], mu, s2);
}

Eigen::VectorXd BayesModel::initial_point() const {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(dimension_);
  if (kind_ == BayesKind::BM2) {
    const int n = spec_.n;
    double t_min = std::numeric_limits<double>::infinity();
    double t_max = -t_min;
    for (double x : x_) {
      t_min = std::min(t_min, x);
      t_max = std::max(t_max, x);
    }
    const double range = std::max(t_max - t_min, 1e-3);
    const auto spread = spread_locations(t_min, t_max, n);
    if (ordered_loc_) {
      u[1 + n] = spread[0];
      for (int k = 1; k < n; ++k)
        u[1 + n + k] = std::log(std::max(spread[k] - spread[k - 1], 1e-6));
    } else {
      for (int k = 0; k < n; ++k) u[1 + n + k] = spread[k];
    }
    for (int k = 0; k < n; ++k) u[1 + 2 * n + k] = std::log(range / n);
    u[dimension_ - 1] = range / n;
  }
  return u;
}

InvGamma conjugate_oracle_posterior(std::span<const double> y,
                                    double known_mean, const InvGamma& prior) {
  InvGamma post = prior;
  post.shape += 0.5 * static_cast<double>(y.size());
  for (double v : y) post.rate += 0.5 * (v - known_mean) * (v - known_mean);
  return post;
}

PosteriorPredictive posterior_predictive(
    const BayesModel& model, const PosteriorSamples& physical_samples,
    std::span<const std::pair<double, double>> grid, std::uint64_t seed,
    bool nearest_band_fallback) {
  if (physical_samples.dimension() != model.dimension())
    throw dimension_error(
        "posterior_predictive: samples do not match the model");
  const Eigen::MatrixXd pooled = physical_samples.pooled();
  const auto n_draws = pooled.rows();
  if (n_draws == 0)
    throw precondition_error("posterior_predictive: no draws");

  PosteriorPredictive out;
  out.samples.resize(n_draws, static_cast<Eigen::Index>(grid.size()));
  std::vector<Eigen::VectorXd> draws(static_cast<std::size_t>(n_draws));
  for (Eigen::Index j = 0; j < n_draws; ++j)
    draws[static_cast<std::size_t>(j)] = pooled.row(j).transpose();

  const CounterRng base(seed);
  std::vector<double> column(n_draws);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    CounterRng rng = base.substream(g);
    const auto [speed, freq] = grid[g];
    for (Eigen::Index j = 0; j < n_draws; ++j) {
      const auto& draw = draws[static_cast<std::size_t>(j)];
      const std::span<const double> draw_span(
          draw.data(), static_cast<std::size_t>(draw.size()));
      const double mu = model.mean_at(speed, freq, draw_span);
      const double sd =
          std::sqrt(model.variance_at(freq, draw_span, nearest_band_fallback));
      const double sim = mu + sd * rng.normal();
      out.samples(j, static_cast<Eigen::Index>(g)) = sim;
      column[static_cast<std::size_t>(j)] = sim;
    }
    PredictivePoint point;
    point.speed_kmph = speed;
    point.frequency_hz = freq;
    point.mean = mean(column);
    std::sort(column.begin(), column.end());
    point.lower95 = quantile_sorted(column, 0.025);
    point.upper95 = quantile_sorted(column, 0.975);
    out.points.push_back(point);
  }
  return out;
}

}  // namespace nvh
