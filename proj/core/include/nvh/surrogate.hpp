#pragma once

#include <span>
#include <string>
#include <vector>

#include "nvh/errors.hpp"

namespace nvh {

class Dataset;

enum class Family { AeroPolynomial, AeroGaussian, Tire };
enum class FreqTransform { Log10, Identity };

std::string to_string(Family f);
Family family_from_string(const std::string& s);
std::string to_string(FreqTransform t);
FreqTransform freq_transform_from_string(const std::string& s);

/// Which mean function to evaluate and with what structural constants.
///
/// m is the polynomial order (m+1 coefficients), n the number of Gaussian
/// bases. r is the speed exponent of the physical level term (6 for dipole
/// sources); r1/r2 are the tire-model exponents. c0 is the reference speed
/// constant in the physical term, in m/s like the converted vehicle speed.
struct SurrogateSpec {
  Family family = Family::AeroPolynomial;
  int m = 4;
  int n = 6;
  int r = 6;
  double r1 = 0.0;
  double r2 = 1.0;
  double c0 = 343.0;
  FreqTransform freq_transform = FreqTransform::Log10;
};

/// Flat parameter set with named blocks. Flattening order is fixed:
/// b_scale, poly, amp, loc, width, noise_sd.
struct ParameterVector {
  double b_scale = 1.0;
  std::vector<double> poly;
  std::vector<double> amp;
  std::vector<double> loc;
  std::vector<double> width;
  std::vector<double> noise_sd;
};

/// Enforce block sizes against the spec and positivity invariants.
void validate(const SurrogateSpec& spec, const ParameterVector& params);

/// km/h -> m/s.
inline double speed_to_mps(double v_kmph) { return v_kmph / 3.6; }

/// Apply the spec's frequency transform.
double transform_frequency(double f_hz, const SurrogateSpec& spec);

/// 10 log10( b v^r / (c0^(r-3) 1e-12) ) with v converted to m/s.
double physical_aero_term(double v_kmph, const SurrogateSpec& spec,
                          double b_scale);

/// sum_k coeffs[k] x^k, evaluated in Horner form.
double poly_basis_eval(double x, std::span<const double> coeffs);

/// sum_k amp[k] exp(-(x - loc[k])^2 / width[k]^2).
double gauss_basis_eval(double x, std::span<const double> amp,
                        std::span<const double> loc,
                        std::span<const double> width);

double mean_aero1(double v_kmph, double f_hz, const SurrogateSpec& spec,
                  const ParameterVector& params);
double mean_aero2(double v_kmph, double f_hz, const SurrogateSpec& spec,
                  const ParameterVector& params);
double mean_tire(double v_kmph, double f_hz, const SurrogateSpec& spec,
                 const ParameterVector& params);

/// Family-dispatching mean.
double mean_value(double v_kmph, double f_hz, const SurrogateSpec& spec,
                  const ParameterVector& params);

/// Mean at every record of the dataset, in record order.
std::vector<double> mean_vector(const Dataset& data, const SurrogateSpec& spec,
                                const ParameterVector& params);

/// Free (fitted) parameters: poly for AeroPolynomial, amp/loc/width for
/// AeroGaussian, both for Tire. b_scale and noise_sd are not free.
int free_param_count(const SurrogateSpec& spec);
std::vector<std::string> free_param_names(const SurrogateSpec& spec);
std::vector<double> get_free_params(const SurrogateSpec& spec,
                                    const ParameterVector& params);
void set_free_params(const SurrogateSpec& spec, std::span<const double> theta,
                     ParameterVector& params);

/// Analytic d(mean)/d(free params) at one point; grad.size() must equal
/// free_param_count(spec).
void mean_gradient(double v_kmph, double f_hz, const SurrogateSpec& spec,
                   const ParameterVector& params, std::span<double> grad);

}  // namespace nvh
