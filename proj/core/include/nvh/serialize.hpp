#pragma once

#include <iosfwd>
#include <string>

#include "nvh/bayes.hpp"
#include "nvh/bootstrap.hpp"
#include "nvh/dataset.hpp"
#include "nvh/diagnostics.hpp"
#include "nvh/fit.hpp"
#include "nvh/loo.hpp"
#include "nvh/sampler.hpp"
#include "nvh/surrogate.hpp"

namespace nvh {

std::string to_json(const SurrogateSpec& spec);
SurrogateSpec surrogate_spec_from_json(const std::string& text);

std::string to_json(const ParameterVector& params);
ParameterVector parameter_vector_from_json(const std::string& text);

std::string to_json(const Dataset& data);
Dataset dataset_from_json(const std::string& text);

std::string to_json(const SynthConfig& config);
SynthConfig synth_config_from_json(const std::string& text);

std::string to_json(const PriorSpec& priors);
PriorSpec prior_spec_from_json(const std::string& text);

std::string to_json(const SamplerConfig& config);
SamplerConfig sampler_config_from_json(const std::string& text);

std::string to_json(const FitResult& result);
std::string to_json(const CvReport& report);
std::string to_json(const ConvergenceReport& report);
std::string to_json(const LooReport& report);
std::string to_json(const std::vector<RankEntry>& table);

/// Sampler run metadata: shapes, step sizes, divergences, parameter names.
std::string posterior_summary_json(const PosteriorSamples& samples);

std::string to_json(const BootstrapResult& result);
/// Rebuild a BootstrapResult from its JSON document plus the replicate CSV.
BootstrapResult bootstrap_result_from_json(const std::string& text,
                                           std::istream& replicates_csv);
void write_replicates_csv(std::ostream& out, const BootstrapResult& result);

}  // namespace nvh
