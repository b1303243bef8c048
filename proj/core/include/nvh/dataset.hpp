#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nvh/errors.hpp"
#include "nvh/surrogate.hpp"

namespace nvh {

/// One SPL observation at a (frequency band, speed) operating point plus the
/// categorical attributes that identify the measurement.
struct SpectrumRecord {
  double frequency_hz = 0.0;
  double speed_kmph = 0.0;
  double spl_db = 0.0;
  std::map<std::string, std::string> categories;
};

/// Conjunction of attribute = value constraints used to carve a sub-dataset.
struct CategoricalSelector {
  std::map<std::string, std::string> constraints;
};

/// Immutable, schema-checked collection of spectrum records.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<std::string> schema, std::vector<SpectrumRecord> records);

  const std::vector<std::string>& schema() const { return schema_; }
  const std::vector<SpectrumRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  const SpectrumRecord& operator[](std::size_t i) const { return records_[i]; }
  auto begin() const { return records_.begin(); }
  auto end() const { return records_.end(); }

  bool has_attribute(const std::string& name) const;

 private:
  std::vector<std::string> schema_;
  std::vector<SpectrumRecord> records_;
};

/// Read a dataset from CSV. The header must name frequency_hz, speed_kmph and
/// spl_db plus one column per schema attribute; extra columns are ignored.
Dataset load_csv(const std::string& path,
                 const std::vector<std::string>& schema);

/// Write a dataset as CSV with full round-trip precision.
void write_csv(const Dataset& data, const std::string& path);

/// Records matching every selector constraint, in the original order.
Dataset select(const Dataset& data, const CategoricalSelector& selector);

/// Synthetic data generation: surrogate mean plus Gaussian noise on a
/// speed x frequency grid with replicates.
struct SynthConfig {
  SurrogateSpec generating_spec;
  ParameterVector true_params;
  std::vector<double> speeds;
  std::vector<double> frequency_bands;
  std::vector<double> noise_sd_db{0.0};  // scalar (size 1) or one per band
  int replicate_count = 1;
  std::uint64_t rng_seed = 0;
};

Dataset synthesize(const SynthConfig& config);

/// Third-octave band centers from 100 Hz to 8 kHz.
std::vector<double> default_frequency_bands();

}  // namespace nvh
