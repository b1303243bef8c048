#include "nvh/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>

#include "nvh/io.hpp"
#include "nvh/rng.hpp"

namespace nvh {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  fields.push_back(field);
  for (auto& f : fields) {
    const auto first = f.find_first_not_of(" \t");
    const auto last = f.find_last_not_of(" \t");
    f = (first == std::string::npos) ? "" : f.substr(first, last - first + 1);
  }
  return fields;
}

Dataset::Dataset(std::vector<std::string> schema,
                 std::vector<SpectrumRecord> records)
    : schema_(std::move(schema)), records_(std::move(records)) {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    if (!(r.frequency_hz > 0.0))
      throw domain_error("record " + std::to_string(i) +
                         ": frequency_hz must be positive");
    if (!(r.speed_kmph > 0.0))
      throw domain_error("record " + std::to_string(i) +
                         ": speed_kmph must be positive");
    if (!std::isfinite(r.spl_db))
      throw domain_error("record " + std::to_string(i) +
                         ": spl_db must be finite");
    if (r.categories.size() != schema_.size())
      throw schema_error("record " + std::to_string(i) +
                         ": categorical attributes do not match the schema");
    for (const auto& name : schema_)
      if (!r.categories.count(name))
        throw schema_error("record " + std::to_string(i) +
                           ": missing attribute '" + name + "'");
  }
}

bool Dataset::has_attribute(const std::string& name) const {
  return std::find(schema_.begin(), schema_.end(), name) != schema_.end();
}

namespace {

double parse_numeric_field(const std::string& text, const std::string& column,
                           std::size_t row) {
  if (text.empty())
    throw parse_error("row " + std::to_string(row) + ": empty value in column '" +
                      column + "'");
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size())
    throw parse_error("row " + std::to_string(row) + ": cannot parse '" + text +
                      "' in column '" + column + "'");
  if (!std::isfinite(v))
    throw parse_error("row " + std::to_string(row) + ": non-finite value in column '" +
                      column + "'");
  return v;
}

}  // namespace

Dataset load_csv(const std::string& path,
                 const std::vector<std::string>& schema) {
  std::ifstream in(path);
  if (!in) throw parse_error("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw schema_error("'" + path + "' is empty");
  const auto header = split_csv_line(line);

  auto column_index = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw schema_error("'" + path + "' is missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };

  const std::size_t freq_col = column_index("frequency_hz");
  const std::size_t speed_col = column_index("speed_kmph");
  const std::size_t spl_col = column_index("spl_db");
  std::vector<std::size_t> attr_cols;
  for (const auto& name : schema) attr_cols.push_back(column_index(name));

  std::vector<SpectrumRecord> records;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++row;
    const auto fields = split_csv_line(line);
    if (fields.size() < header.size())
      throw parse_error("row " + std::to_string(row) + ": expected " +
                        std::to_string(header.size()) + " fields, got " +
                        std::to_string(fields.size()));
    SpectrumRecord rec;
    rec.frequency_hz = parse_numeric_field(fields[freq_col], "frequency_hz", row);
    rec.speed_kmph = parse_numeric_field(fields[speed_col], "speed_kmph", row);
    rec.spl_db = parse_numeric_field(fields[spl_col], "spl_db", row);
    for (std::size_t a = 0; a < schema.size(); ++a)
      rec.categories[schema[a]] = fields[attr_cols[a]];
    records.push_back(std::move(rec));
  }
  return Dataset(schema, std::move(records));
}

void write_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw parse_error("cannot open '" + path + "' for writing");
  out << "frequency_hz,speed_kmph,spl_db";
  for (const auto& name : data.schema()) out << ',' << name;
  out << '\n';
  for (const auto& r : data.records()) {
    out << format_double(r.frequency_hz) << ',' << format_double(r.speed_kmph)
        << ',' << format_double(r.spl_db);
    for (const auto& name : data.schema()) out << ',' << r.categories.at(name);
    out << '\n';
  }
}

Dataset select(const Dataset& data, const CategoricalSelector& selector) {
  for (const auto& [name, value] : selector.constraints)
    if (!data.has_attribute(name))
      throw selection_error("selector references unknown attribute '" + name +
                            "'");
  std::vector<SpectrumRecord> kept;
  for (const auto& r : data.records()) {
    bool match = true;
    for (const auto& [name, value] : selector.constraints)
      if (r.categories.at(name) != value) {
        match = false;
        break;
      }
    if (match) kept.push_back(r);
  }
  return Dataset(data.schema(), std::move(kept));
}

Dataset synthesize(const SynthConfig& config) {
  validate(config.generating_spec, config.true_params);
  if (config.speeds.empty() || config.frequency_bands.empty())
    throw precondition_error("synthesize: speeds and frequency_bands must be non-empty");
  if (config.replicate_count < 1)
    throw precondition_error("synthesize: replicate_count must be positive");
  if (config.noise_sd_db.size() != 1 &&
      config.noise_sd_db.size() != config.frequency_bands.size())
    throw dimension_error(
        "synthesize: noise_sd_db must be scalar or one entry per band");
  for (double sd : config.noise_sd_db)
    if (!(sd >= 0.0)) throw domain_error("synthesize: noise sd must be >= 0");

  CounterRng rng(config.rng_seed);
  std::vector<SpectrumRecord> records;
  records.reserve(config.speeds.size() * config.frequency_bands.size() *
                  config.replicate_count);
  for (double v : config.speeds) {
    for (std::size_t b = 0; b < config.frequency_bands.size(); ++b) {
      const double f = config.frequency_bands[b];
      const double mean =
          mean_value(v, f, config.generating_spec, config.true_params);
      const double sd =
          config.noise_sd_db.size() == 1 ? config.noise_sd_db[0] : config.noise_sd_db[b];
      for (int rep = 0; rep < config.replicate_count; ++rep) {
        SpectrumRecord r;
        r.frequency_hz = f;
        r.speed_kmph = v;
        r.spl_db = sd > 0.0 ? mean + sd * rng.normal() : mean;
        records.push_back(std::move(r));
      }
    }
  }
  return Dataset({}, std::move(records));
}

std::vector<double> default_frequency_bands() {
  return {100.0,  125.0,  160.0,  200.0,  250.0,  315.0,  400.0,
          500.0,  630.0,  800.0,  1000.0, 1250.0, 1600.0, 2000.0,
          2500.0, 3150.0, 4000.0, 5000.0, 6300.0, 8000.0};
}

}  // namespace nvh
