#include "nvh/serialize.hpp"

#include <json.hpp>
#include <cstdlib>
#include <istream>
#include <ostream>

#include "nvh/io.hpp"

namespace nvh {

using nlohmann::json;

namespace {

json parse(const std::string& text, const char* what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded())
    throw parse_error(std::string(what) + ": invalid JSON");
  return j;
}

json spec_to_json(const SurrogateSpec& spec) {
  return json{{"family", to_string(spec.family)},
              {"m", spec.m},
              {"n", spec.n},
              {"r", spec.r},
              {"r1", spec.r1},
              {"r2", spec.r2},
              {"c0", spec.c0},
              {"freq_transform", to_string(spec.freq_transform)}};
}

SurrogateSpec spec_from_json(const json& j) {
  SurrogateSpec spec;
  if (!j.contains("family"))
    throw config_error("surrogate spec: missing 'family'");
  spec.family = family_from_string(j.at("family").get<std::string>());
  spec.m = j.value("m", spec.m);
  spec.n = j.value("n", spec.n);
  spec.r = j.value("r", spec.r);
  spec.r1 = j.value("r1", spec.r1);
  spec.r2 = j.value("r2", spec.r2);
  spec.c0 = j.value("c0", spec.c0);
  if (j.contains("freq_transform"))
    spec.freq_transform =
        freq_transform_from_string(j.at("freq_transform").get<std::string>());
  return spec;
}

json params_to_json(const ParameterVector& p) {
  return json{{"b_scale", p.b_scale}, {"poly", p.poly},   {"amp", p.amp},
              {"loc", p.loc},         {"width", p.width}, {"noise_sd", p.noise_sd}};
}

ParameterVector params_from_json(const json& j) {
  ParameterVector p;
  p.b_scale = j.value("b_scale", 1.0);
  p.poly = j.value("poly", std::vector<double>{});
  p.amp = j.value("amp", std::vector<double>{});
  p.loc = j.value("loc", std::vector<double>{});
  p.width = j.value("width", std::vector<double>{});
  if (j.contains("noise_sd")) {
    if (j.at("noise_sd").is_number())
      p.noise_sd = {j.at("noise_sd").get<double>()};
    else
      p.noise_sd = j.at("noise_sd").get<std::vector<double>>();
  }
  return p;
}

json normal_prior_to_json(const NormalPrior& p) {
  return json{{"mean", p.mean}, {"sd", p.sd}};
}

NormalPrior normal_prior_from_json(const json& j) {
  return NormalPrior{j.value("mean", 0.0), j.value("sd", 1.0)};
}

}  // namespace

std::string to_json(const SurrogateSpec& spec) {
  return spec_to_json(spec).dump(2);
}

SurrogateSpec surrogate_spec_from_json(const std::string& text) {
  return spec_from_json(parse(text, "surrogate spec"));
}

std::string to_json(const ParameterVector& params) {
  return params_to_json(params).dump(2);
}

ParameterVector parameter_vector_from_json(const std::string& text) {
  return params_from_json(parse(text, "parameter vector"));
}

std::string to_json(const Dataset& data) {
  json records = json::array();
  for (const auto& r : data.records())
    records.push_back(json{{"frequency_hz", r.frequency_hz},
                           {"speed_kmph", r.speed_kmph},
                           {"spl_db", r.spl_db},
                           {"categories", r.categories}});
  return json{{"schema", data.schema()}, {"records", records}}.dump(2);
}

Dataset dataset_from_json(const std::string& text) {
  const json j = parse(text, "dataset");
  std::vector<std::string> schema =
      j.value("schema", std::vector<std::string>{});
  std::vector<SpectrumRecord> records;
  for (const auto& rj : j.value("records", json::array())) {
    SpectrumRecord r;
    r.frequency_hz = rj.at("frequency_hz").get<double>();
    r.speed_kmph = rj.at("speed_kmph").get<double>();
    r.spl_db = rj.at("spl_db").get<double>();
    r.categories =
        rj.value("categories", std::map<std::string, std::string>{});
    records.push_back(std::move(r));
  }
  return Dataset(std::move(schema), std::move(records));
}

std::string to_json(const SynthConfig& config) {
  return json{{"spec", spec_to_json(config.generating_spec)},
              {"true_params", params_to_json(config.true_params)},
              {"speeds", config.speeds},
              {"frequency_bands", config.frequency_bands},
              {"noise_sd_db", config.noise_sd_db},
              {"replicate_count", config.replicate_count},
              {"rng_seed", config.rng_seed}}
      .dump(2);
}

SynthConfig synth_config_from_json(const std::string& text) {
  const json j = parse(text, "synth config");
  SynthConfig config;
  config.generating_spec = spec_from_json(j.at("spec"));
  config.true_params = params_from_json(j.at("true_params"));
  config.speeds = j.at("speeds").get<std::vector<double>>();
  config.frequency_bands = j.at("frequency_bands").get<std::vector<double>>();
  if (j.contains("noise_sd_db")) {
    if (j.at("noise_sd_db").is_number())
      config.noise_sd_db = {j.at("noise_sd_db").get<double>()};
    else
      config.noise_sd_db = j.at("noise_sd_db").get<std::vector<double>>();
  }
  config.replicate_count = j.value("replicate_count", 1);
  config.rng_seed = j.value("rng_seed", std::uint64_t{0});
  return config;
}

std::string to_json(const PriorSpec& priors) {
  json poly = json::array(), amp = json::array(), loc = json::array();
  for (const auto& p : priors.poly) poly.push_back(normal_prior_to_json(p));
  for (const auto& p : priors.amp) amp.push_back(normal_prior_to_json(p));
  for (const auto& p : priors.loc) loc.push_back(normal_prior_to_json(p));
  return json{{"poly", poly},
              {"intercept", normal_prior_to_json(priors.intercept)},
              {"amp", amp},
              {"loc", loc},
              {"sigma_c", priors.sigma_c},
              {"mu_c_hyper", normal_prior_to_json(priors.mu_c_hyper)},
              {"variance",
               json{{"shape", priors.variance.shape},
                    {"rate", priors.variance.rate}}}}
      .dump(2);
}

PriorSpec prior_spec_from_json(const std::string& text) {
  const json j = parse(text, "prior spec");
  PriorSpec priors;
  for (const auto& pj : j.value("poly", json::array()))
    priors.poly.push_back(normal_prior_from_json(pj));
  if (j.contains("intercept"))
    priors.intercept = normal_prior_from_json(j.at("intercept"));
  priors.amp.clear();
  for (const auto& pj : j.value("amp", json::array()))
    priors.amp.push_back(normal_prior_from_json(pj));
  for (const auto& pj : j.value("loc", json::array()))
    priors.loc.push_back(normal_prior_from_json(pj));
  priors.sigma_c = j.value("sigma_c", priors.sigma_c);
  if (j.contains("mu_c_hyper"))
    priors.mu_c_hyper = normal_prior_from_json(j.at("mu_c_hyper"));
  if (j.contains("variance")) {
    priors.variance.shape = j.at("variance").value("shape", 2.0);
    priors.variance.rate = j.at("variance").value("rate", 2.0);
  }
  return priors;
}

std::string to_json(const SamplerConfig& config) {
  return json{{"chains", config.chains},
              {"draws", config.draws},
              {"warmup", config.warmup},
              {"target_accept", config.target_accept},
              {"max_tree_depth", config.max_tree_depth},
              {"seed", config.seed},
              {"init_jitter", config.init_jitter},
              {"parallel", config.parallel}}
      .dump(2);
}

SamplerConfig sampler_config_from_json(const std::string& text) {
  const json j = parse(text, "sampler config");
  SamplerConfig config;
  config.chains = j.value("chains", config.chains);
  config.draws = j.value("draws", config.draws);
  config.warmup = j.value("warmup", config.warmup);
  config.target_accept = j.value("target_accept", config.target_accept);
  config.max_tree_depth = j.value("max_tree_depth", config.max_tree_depth);
  config.seed = j.value("seed", config.seed);
  config.init_jitter = j.value("init_jitter", config.init_jitter);
  config.parallel = j.value("parallel", config.parallel);
  return config;
}

std::string to_json(const FitResult& result) {
  return json{{"params", params_to_json(result.params)},
              {"residual_sd", result.residual_sd},
              {"r_squared", result.r_squared},
              {"iterations", result.iterations},
              {"converged", result.converged},
              {"cost_trace", result.cost_trace}}
      .dump(2);
}

std::string to_json(const CvReport& report) {
  return json{{"k", report.k},
              {"fold_r2", report.fold_r2},
              {"r2_cv", report.r2_cv},
              {"r2_var", report.r2_var},
              {"runs", report.runs},
              {"rng_seed", report.rng_seed},
              {"run_r2cv", report.run_r2cv}}
      .dump(2);
}

std::string to_json(const ConvergenceReport& report) {
  json params = json::array();
  for (const auto& p : report.params) {
    json hist = json::array();
    for (Eigen::Index c = 0; c < p.rank_hist.rows(); ++c) {
      json row = json::array();
      for (Eigen::Index b = 0; b < p.rank_hist.cols(); ++b)
        row.push_back(p.rank_hist(c, b));
      hist.push_back(row);
    }
    params.push_back(json{{"name", p.name},
                          {"r_hat", p.r_hat},
                          {"ess", p.ess},
                          {"within", p.within},
                          {"between", p.between},
                          {"rank_hist", hist}});
  }
  return json{{"max_r_hat", report.max_r_hat}, {"params", params}}.dump(2);
}

std::string to_json(const LooReport& report) {
  return json{{"model_id", report.model_id},
              {"elpd", report.elpd},
              {"p_loo", report.p_loo},
              {"se", report.se},
              {"n_obs", report.n_obs},
              {"n_draws", report.n_draws},
              {"k_hat", report.k_hat},
              {"elpd_points", report.elpd_points},
              {"high_k_indices", report.high_k_indices}}
      .dump(2);
}

std::string to_json(const std::vector<RankEntry>& table) {
  json rows = json::array();
  for (const auto& e : table)
    rows.push_back(json{{"model_id", e.model_id},
                        {"rank", e.rank},
                        {"elpd", e.elpd},
                        {"p_loo", e.p_loo},
                        {"se", e.se}});
  return rows.dump(2);
}

std::string posterior_summary_json(const PosteriorSamples& samples) {
  json step_sizes = json::array(), divergences = json::array(),
       mean_accept = json::array();
  for (const auto& chain : samples.chains) {
    step_sizes.push_back(chain.step_size);
    divergences.push_back(chain.divergences);
    double acc = 0.0;
    for (const auto& s : chain.stats) acc += s.accept_stat;
    mean_accept.push_back(chain.stats.empty() ? 0.0 : acc / chain.stats.size());
  }
  return json{{"chains", samples.num_chains()},
              {"draws", samples.num_draws()},
              {"warmup", samples.warmup},
              {"seed", samples.seed},
              {"dimension", samples.dimension()},
              {"param_names", samples.param_names},
              {"step_sizes", step_sizes},
              {"divergences", divergences},
              {"mean_accept", mean_accept}}
      .dump(2);
}

std::string to_json(const BootstrapResult& result) {
  return json{{"spec", spec_to_json(result.spec)},
              {"theta_hat", params_to_json(result.theta_hat)},
              {"param_names", result.param_names},
              {"param_sd", result.param_sd},
              {"failed_replicates", result.failed_replicates},
              {"noise_sd", result.noise_sd},
              {"replicates", result.replicate_params.rows()}}
      .dump(2);
}

void write_replicates_csv(std::ostream& out, const BootstrapResult& result) {
  out << "replicate";
  for (const auto& name : result.param_names) out << ',' << name;
  out << '\n';
  for (Eigen::Index r = 0; r < result.replicate_params.rows(); ++r) {
    out << r;
    for (Eigen::Index j = 0; j < result.replicate_params.cols(); ++j)
      out << ',' << format_double(result.replicate_params(r, j));
    out << '\n';
  }
}

BootstrapResult bootstrap_result_from_json(const std::string& text,
                                           std::istream& replicates_csv) {
  const json j = parse(text, "bootstrap result");
  BootstrapResult result;
  result.spec = spec_from_json(j.at("spec"));
  result.theta_hat = params_from_json(j.at("theta_hat"));
  result.param_names = j.value("param_names", std::vector<std::string>{});
  result.param_sd = j.value("param_sd", std::vector<double>{});
  result.failed_replicates = j.value("failed_replicates", 0);
  result.noise_sd = j.value("noise_sd", 0.0);

  std::string line;
  if (!std::getline(replicates_csv, line))
    throw parse_error("replicates csv: missing header");
  std::vector<std::vector<double>> rows;
  while (std::getline(replicates_csv, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    std::vector<double> row;
    for (std::size_t f = 1; f < fields.size(); ++f)
      row.push_back(std::strtod(fields[f].c_str(), nullptr));
    rows.push_back(std::move(row));
  }
  const auto p = static_cast<Eigen::Index>(result.param_names.size());
  result.replicate_params.resize(static_cast<Eigen::Index>(rows.size()), p);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (static_cast<Eigen::Index>(rows[r].size()) != p)
      throw parse_error("replicates csv: ragged row");
    for (Eigen::Index c = 0; c < p; ++c)
      result.replicate_params(static_cast<Eigen::Index>(r), c) = rows[r][c];
  }
  return result;
}

}  // namespace nvh
