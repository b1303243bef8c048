#include "nvh/surrogate.hpp"

#include <cmath>
#include <cstddef>

#include "nvh/dataset.hpp"

namespace nvh {

namespace {

bool is_integral(double x) { return x == std::floor(x); }

/// x^e with the domain checks the tire model needs.
double checked_pow(double x, double e, const char* what) {
  if (e == 0.0) return 1.0;
  if (x < 0.0 && !is_integral(e))
    throw domain_error(std::string(what) +
                       ": negative base with fractional exponent");
  if (x == 0.0 && e < 0.0)
    throw domain_error(std::string(what) + ": zero base with negative exponent");
  return std::pow(x, e);
}

}  // namespace

std::string to_string(Family f) {
  switch (f) {
    case Family::AeroPolynomial: return "aero_poly";
    case Family::AeroGaussian: return "aero_gauss";
    case Family::Tire: return "tire";
  }
  return "unknown";
}

Family family_from_string(const std::string& s) {
  if (s == "aero_poly") return Family::AeroPolynomial;
  if (s == "aero_gauss") return Family::AeroGaussian;
  if (s == "tire") return Family::Tire;
  throw config_error("unknown surrogate family '" + s + "'");
}

std::string to_string(FreqTransform t) {
  return t == FreqTransform::Log10 ? "log10" : "identity";
}

FreqTransform freq_transform_from_string(const std::string& s) {
  if (s == "log10") return FreqTransform::Log10;
  if (s == "identity") return FreqTransform::Identity;
  throw config_error("unknown frequency transform '" + s + "'");
}

void validate(const SurrogateSpec& spec, const ParameterVector& params) {
  if (spec.m < 0 || spec.n < 0)
    throw config_error("surrogate spec: m and n must be non-negative");
  if (spec.r < 1) throw config_error("surrogate spec: r must be >= 1");
  if (spec.c0 <= 0.0) throw config_error("surrogate spec: c0 must be positive");

  const bool uses_poly =
      spec.family == Family::AeroPolynomial || spec.family == Family::Tire;
  const bool uses_gauss =
      spec.family == Family::AeroGaussian || spec.family == Family::Tire;

  const std::size_t want_poly = uses_poly ? spec.m + 1 : 0;
  const std::size_t want_gauss = uses_gauss ? spec.n : 0;
  if (params.poly.size() != want_poly)
    throw dimension_error("parameter block 'poly' has " +
                          std::to_string(params.poly.size()) +
                          " entries, expected " + std::to_string(want_poly));
  if (params.amp.size() != want_gauss || params.loc.size() != want_gauss ||
      params.width.size() != want_gauss)
    throw dimension_error("parameter blocks amp/loc/width must each have " +
                          std::to_string(want_gauss) + " entries");

  if (params.b_scale <= 0.0)
    throw domain_error("parameter b_scale must be positive");
  for (double w : params.width)
    if (!(w > 0.0)) throw domain_error("width entries must be positive");
  for (double s : params.noise_sd)
    if (!(s > 0.0)) throw domain_error("noise_sd entries must be positive");
}

double transform_frequency(double f_hz, const SurrogateSpec& spec) {
  if (spec.freq_transform == FreqTransform::Log10) {
    if (f_hz <= 0.0)
      throw domain_error("frequency must be positive under log10 transform");
    return std::log10(f_hz);
  }
  return f_hz;
}

double physical_aero_term(double v_kmph, const SurrogateSpec& spec,
                          double b_scale) {
  if (!(v_kmph > 0.0)) throw domain_error("speed must be positive");
  if (!(b_scale > 0.0)) throw domain_error("b_scale must be positive");
  const double v = speed_to_mps(v_kmph);
  return 10.0 * std::log10(b_scale * std::pow(v, spec.r) /
                           (std::pow(spec.c0, spec.r - 3) * 1e-12));
}

double poly_basis_eval(double x, std::span<const double> coeffs) {
  if (coeffs.empty())
    throw precondition_error("poly_basis_eval: empty coefficient list");
  if (!std::isfinite(x)) throw domain_error("poly_basis_eval: non-finite x");
  double acc = 0.0;
  for (std::size_t k = coeffs.size(); k-- > 0;) acc = acc * x + coeffs[k];
  return acc;
}

double gauss_basis_eval(double x, std::span<const double> amp,
                        std::span<const double> loc,
                        std::span<const double> width) {
  if (amp.size() != loc.size() || amp.size() != width.size())
    throw dimension_error("gauss_basis_eval: block sizes differ");
  if (!std::isfinite(x)) throw domain_error("gauss_basis_eval: non-finite x");
  double acc = 0.0;
  for (std::size_t k = 0; k < amp.size(); ++k) {
    if (!(width[k] > 0.0))
      throw domain_error("gauss_basis_eval: width must be positive");
    const double z = (x - loc[k]) / width[k];
    acc += amp[k] * std::exp(-z * z);
  }
  return acc;
}

double mean_aero1(double v_kmph, double f_hz, const SurrogateSpec& spec,
                  const ParameterVector& params) {
  if (spec.family != Family::AeroPolynomial)
    throw spec_error("mean_aero1 requires the aero_poly family");
  return physical_aero_term(v_kmph, spec, params.b_scale) +
         poly_basis_eval(transform_frequency(f_hz, spec), params.poly);
}

double mean_aero2(double v_kmph, double f_hz, const SurrogateSpec& spec,
                  const ParameterVector& params) {
  if (spec.family != Family::AeroGaussian)
    throw spec_error("mean_aero2 requires the aero_gauss family");
  return physical_aero_term(v_kmph, spec, params.b_scale) +
         gauss_basis_eval(transform_frequency(f_hz, spec), params.amp,
                          params.loc, params.width);
}

double mean_tire(double v_kmph, double f_hz, const SurrogateSpec& spec,
                 const ParameterVector& params) {
  if (spec.family != Family::Tire)
    throw spec_error("mean_tire requires the tire family");
  if (!(v_kmph > 0.0)) throw domain_error("speed must be positive");
  const double v = speed_to_mps(v_kmph);
  const double t = transform_frequency(f_hz, spec);
  return checked_pow(t, spec.r1, "mean_tire frequency term") *
             poly_basis_eval(v, params.poly) +
         checked_pow(v, spec.r2, "mean_tire speed term") *
             gauss_basis_eval(t, params.amp, params.loc, params.width);
}

double mean_value(double v_kmph, double f_hz, const SurrogateSpec& spec,
                  const ParameterVector& params) {
  switch (spec.family) {
    case Family::AeroPolynomial: return mean_aero1(v_kmph, f_hz, spec, params);
    case Family::AeroGaussian: return mean_aero2(v_kmph, f_hz, spec, params);
    case Family::Tire: return mean_tire(v_kmph, f_hz, spec, params);
  }
  throw spec_error("mean_value: unknown family");
}

std::vector<double> mean_vector(const Dataset& data, const SurrogateSpec& spec,
                                const ParameterVector& params) {
  if (data.size() == 0) throw precondition_error("mean_vector: empty dataset");
  std::vector<double> out;
  out.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    try {
      out.push_back(
          mean_value(data[i].speed_kmph, data[i].frequency_hz, spec, params));
    } catch (const std::runtime_error& e) {
      throw domain_error("mean_vector: record " + std::to_string(i) + ": " +
                         e.what());
    }
  }
  return out;
}

int free_param_count(const SurrogateSpec& spec) {
  switch (spec.family) {
    case Family::AeroPolynomial: return spec.m + 1;
    case Family::AeroGaussian: return 3 * spec.n;
    case Family::Tire: return spec.m + 1 + 3 * spec.n;
  }
  return 0;
}

std::vector<std::string> free_param_names(const SurrogateSpec& spec) {
  std::vector<std::string> names;
  const bool uses_poly =
      spec.family == Family::AeroPolynomial || spec.family == Family::Tire;
  const bool uses_gauss =
      spec.family == Family::AeroGaussian || spec.family == Family::Tire;
  if (uses_poly)
    for (int i = 0; i <= spec.m; ++i)
      names.push_back("poly[" + std::to_string(i) + "]");
  if (uses_gauss) {
    for (int k = 0; k < spec.n; ++k)
      names.push_back("amp[" + std::to_string(k) + "]");
    for (int k = 0; k < spec.n; ++k)
      names.push_back("loc[" + std::to_string(k) + "]");
    for (int k = 0; k < spec.n; ++k)
      names.push_back("width[" + std::to_string(k) + "]");
  }
  return names;
}

std::vector<double> get_free_params(const SurrogateSpec& spec,
                                    const ParameterVector& params) {
  validate(spec, params);
  std::vector<double> theta;
  theta.reserve(free_param_count(spec));
  theta.insert(theta.end(), params.poly.begin(), params.poly.end());
  theta.insert(theta.end(), params.amp.begin(), params.amp.end());
  theta.insert(theta.end(), params.loc.begin(), params.loc.end());
  theta.insert(theta.end(), params.width.begin(), params.width.end());
  return theta;
}

void set_free_params(const SurrogateSpec& spec, std::span<const double> theta,
                     ParameterVector& params) {
  if (static_cast<int>(theta.size()) != free_param_count(spec))
    throw dimension_error("set_free_params: expected " +
                          std::to_string(free_param_count(spec)) +
                          " values, got " + std::to_string(theta.size()));
  std::size_t pos = 0;
  const bool uses_poly =
      spec.family == Family::AeroPolynomial || spec.family == Family::Tire;
  const bool uses_gauss =
      spec.family == Family::AeroGaussian || spec.family == Family::Tire;
  if (uses_poly) {
    params.poly.assign(theta.begin() + pos, theta.begin() + pos + spec.m + 1);
    pos += spec.m + 1;
  } else {
    params.poly.clear();
  }
  if (uses_gauss) {
    params.amp.assign(theta.begin() + pos, theta.begin() + pos + spec.n);
    pos += spec.n;
    params.loc.assign(theta.begin() + pos, theta.begin() + pos + spec.n);
    pos += spec.n;
    params.width.assign(theta.begin() + pos, theta.begin() + pos + spec.n);
    pos += spec.n;
  } else {
    params.amp.clear();
    params.loc.clear();
    params.width.clear();
  }
}

void mean_gradient(double v_kmph, double f_hz, const SurrogateSpec& spec,
                   const ParameterVector& params, std::span<double> grad) {
  if (static_cast<int>(grad.size()) != free_param_count(spec))
    throw dimension_error("mean_gradient: wrong gradient size");
  const double t = transform_frequency(f_hz, spec);
  std::size_t pos = 0;

  // scale factors multiplying each basis block
  double poly_scale = 1.0, gauss_scale = 1.0, poly_x = t, gauss_x = t;
  if (spec.family == Family::Tire) {
    const double v = speed_to_mps(v_kmph);
    poly_scale = checked_pow(t, spec.r1, "mean_gradient frequency term");
    gauss_scale = checked_pow(v, spec.r2, "mean_gradient speed term");
    poly_x = v;
  }

  if (spec.family == Family::AeroPolynomial || spec.family == Family::Tire) {
    double power = 1.0;
    for (int i = 0; i <= spec.m; ++i) {
      grad[pos++] = poly_scale * power;
      power *= poly_x;
    }
  }
  if (spec.family == Family::AeroGaussian || spec.family == Family::Tire) {
    for (int k = 0; k < spec.n; ++k) {
      const double w = params.width[k];
      const double d = gauss_x - params.loc[k];
      const double e = std::exp(-d * d / (w * w));
      grad[pos + k] = gauss_scale * e;
      grad[pos + spec.n + k] =
          gauss_scale * params.amp[k] * e * 2.0 * d / (w * w);
      grad[pos + 2 * spec.n + k] =
          gauss_scale * params.amp[k] * e * 2.0 * d * d / (w * w * w);
    }
  }
}

}  // namespace nvh
