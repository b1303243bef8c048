#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "nvh/dataset.hpp"
#include "nvh/fit.hpp"
#include "nvh/serialize.hpp"
#include "nvh/stats.hpp"
#include "test_util.hpp"

using namespace nvh;
using nvhtest::TempDir;
using nvhtest::write_file;

namespace {

SpectrumRecord rec(double f, double v, double l,
                   std::map<std::string, std::string> cats = {}) {
  return SpectrumRecord{f, v, l, std::move(cats)};
}

Dataset body_dataset() {
  std::vector<SpectrumRecord> records;
  for (int i = 0; i < 10; ++i)
    records.push_back(rec(100.0 + i, 140.0, 60.0,
                          {{"body", "Sedan"}, {"state", i < 4 ? "taped" : "untaped"}}));
  for (int i = 0; i < 5; ++i)
    records.push_back(rec(200.0 + i, 140.0, 55.0,
                          {{"body", "Hatchback"}, {"state", "taped"}}));
  return Dataset({"body", "state"}, std::move(records));
}

}  // namespace

TEST_CASE("load_csv ingests rows in order") {
  TempDir dir;
  write_file(dir.file("d.csv"),
             "frequency_hz,speed_kmph,spl_db\n"
             "100,140,62.5\n"
             "125,140,63.5\n"
             "160,200,70.25\n");
  const Dataset d = load_csv(dir.file("d.csv"), {});
  REQUIRE(d.size() == 3);
  CHECK(d[0].frequency_hz == 100.0);
  CHECK(d[2].spl_db == 70.25);
  CHECK(d[2].speed_kmph == 200.0);
}

TEST_CASE("load_csv reports a missing column by name") {
  TempDir dir;
  write_file(dir.file("d.csv"), "frequency_hz,speed_kmph\n100,140\n");
  try {
    load_csv(dir.file("d.csv"), {});
    FAIL("expected schema_error");
  } catch (const schema_error& e) {
    CHECK(std::string(e.what()).find("spl_db") != std::string::npos);
  }
}

TEST_CASE("load_csv cites the row of a non-finite value") {
  TempDir dir;
  std::string csv = "frequency_hz,speed_kmph,spl_db\n";
  for (int i = 1; i <= 10; ++i)
    csv += "100,140," + std::string(i == 7 ? "nan" : "60") + "\n";
  write_file(dir.file("d.csv"), csv);
  try {
    load_csv(dir.file("d.csv"), {});
    FAIL("expected parse_error");
  } catch (const parse_error& e) {
    CHECK(std::string(e.what()).find("row 7") != std::string::npos);
  }
}

TEST_CASE("load_csv rejects non-numeric fields") {
  TempDir dir;
  write_file(dir.file("d.csv"),
             "frequency_hz,speed_kmph,spl_db\n100,fast,60\n");
  CHECK_THROWS_AS(load_csv(dir.file("d.csv"), {}), parse_error);
}

TEST_CASE("csv round trip preserves values and categories") {
  TempDir dir;
  const Dataset d = body_dataset();
  write_csv(d, dir.file("d.csv"));
  const Dataset back = load_csv(dir.file("d.csv"), d.schema());
  REQUIRE(back.size() == d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(back[i].frequency_hz == d[i].frequency_hz);
    CHECK(back[i].spl_db == d[i].spl_db);
    CHECK(back[i].categories == d[i].categories);
  }
}

TEST_CASE("select with no constraints returns everything") {
  const Dataset d = body_dataset();
  const Dataset all = select(d, {});
  CHECK(all.size() == d.size());
}

TEST_CASE("select matches exact counts") {
  const Dataset d = body_dataset();
  CHECK(select(d, {{{"body", "Sedan"}}}).size() == 10);
  CHECK(select(d, {{{"body", "Hatchback"}}}).size() == 5);
}

TEST_CASE("conjunction equals brute-force double filter") {
  const Dataset d = body_dataset();
  const Dataset joint = select(d, {{{"body", "Sedan"}, {"state", "taped"}}});
  const Dataset twice =
      select(select(d, {{{"body", "Sedan"}}}), {{{"state", "taped"}}});
  REQUIRE(joint.size() == twice.size());
  for (std::size_t i = 0; i < joint.size(); ++i) {
    CHECK(joint[i].frequency_hz == twice[i].frequency_hz);
    CHECK(joint[i].categories == twice[i].categories);
  }
}

TEST_CASE("select is idempotent and never invents records") {
  const Dataset d = body_dataset();
  const CategoricalSelector sel{{{"state", "taped"}}};
  const Dataset once = select(d, sel);
  const Dataset twice = select(once, sel);
  REQUIRE(once.size() == twice.size());
  for (std::size_t i = 0; i < once.size(); ++i)
    CHECK(once[i].frequency_hz == twice[i].frequency_hz);
  // every selected record exists in the source, in order
  std::size_t cursor = 0;
  for (const auto& r : once) {
    while (cursor < d.size() &&
           (d[cursor].frequency_hz != r.frequency_hz ||
            d[cursor].categories != r.categories))
      ++cursor;
    CHECK(cursor < d.size());
  }
}

TEST_CASE("select rejects unknown attributes") {
  CHECK_THROWS_AS(select(body_dataset(), {{{"color", "red"}}}),
                  selection_error);
}

TEST_CASE("dataset invariants are enforced") {
  CHECK_THROWS_AS(Dataset({}, {rec(0.0, 140, 60)}), domain_error);
  CHECK_THROWS_AS(Dataset({}, {rec(100, -1, 60)}), domain_error);
  CHECK_THROWS_AS(Dataset({}, {rec(100, 140, NAN)}), domain_error);
  CHECK_THROWS_AS(Dataset({"body"}, {rec(100, 140, 60)}), schema_error);
}

namespace {

SynthConfig poly_synth(double noise, int replicates, std::uint64_t seed) {
  SynthConfig cfg;
  cfg.generating_spec =
      SurrogateSpec{Family::AeroPolynomial, 2, 0, 6, 0.0, 1.0, 343.0,
                    FreqTransform::Log10};
  cfg.true_params.poly = {4.0, -2.0, 0.5};
  cfg.speeds = {140.0, 200.0};
  cfg.frequency_bands = default_frequency_bands();
  cfg.noise_sd_db = {noise};
  cfg.replicate_count = replicates;
  cfg.rng_seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("synthesize with zero noise reproduces the mean exactly") {
  const SynthConfig cfg = poly_synth(0.0, 2, 9);
  const Dataset d = synthesize(cfg);
  REQUIRE(d.size() == 2 * default_frequency_bands().size() * 2);
  for (const auto& r : d) {
    const double mu = mean_value(r.speed_kmph, r.frequency_hz,
                                 cfg.generating_spec, cfg.true_params);
    CHECK(r.spl_db == mu);
  }
}

TEST_CASE("synthesize is deterministic in the seed") {
  const Dataset a = synthesize(poly_synth(1.0, 3, 1234));
  const Dataset b = synthesize(poly_synth(1.0, 3, 1234));
  const Dataset c = synthesize(poly_synth(1.0, 3, 1235));
  REQUIRE(a.size() == b.size());
  bool all_equal = true, any_diff_c = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    all_equal = all_equal && a[i].spl_db == b[i].spl_db;
    any_diff_c = any_diff_c || a[i].spl_db != c[i].spl_db;
  }
  CHECK(all_equal);
  CHECK(any_diff_c);
}

TEST_CASE("synthesized noise has the configured spread") {
  SynthConfig cfg = poly_synth(1.0, 10000, 77);
  cfg.speeds = {140.0};
  cfg.frequency_bands = {1000.0};
  const Dataset d = synthesize(cfg);
  std::vector<double> spl;
  for (const auto& r : d) spl.push_back(r.spl_db);
  const double sd = sample_sd(spl);
  CHECK(sd > 0.97);
  CHECK(sd < 1.03);
}

TEST_CASE("zero-noise synthesis followed by nls recovers the generator") {
  const SynthConfig cfg = poly_synth(0.0, 1, 3);
  const Dataset d = synthesize(cfg);
  const FitResult fit =
      nls_fit(d, cfg.generating_spec, default_init(d, cfg.generating_spec));
  REQUIRE(fit.converged);
  for (std::size_t j = 0; j < cfg.true_params.poly.size(); ++j)
    CHECK(fit.params.poly[j] ==
          doctest::Approx(cfg.true_params.poly[j]).epsilon(1e-6));
}

TEST_CASE("synthesize validates noise vector length and params") {
  SynthConfig cfg = poly_synth(0.0, 1, 3);
  cfg.noise_sd_db = {1.0, 2.0};
  CHECK_THROWS_AS(synthesize(cfg), dimension_error);
  SynthConfig bad = poly_synth(0.0, 1, 3);
  bad.true_params.poly = {1.0};
  CHECK_THROWS_AS(synthesize(bad), dimension_error);
}

TEST_CASE("dataset and synth config survive a json round trip") {
  const Dataset d = body_dataset();
  const Dataset back = dataset_from_json(to_json(d));
  REQUIRE(back.size() == d.size());
  CHECK(back.schema() == d.schema());
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(back[i].spl_db == d[i].spl_db);
    CHECK(back[i].categories == d[i].categories);
  }

  const SynthConfig cfg = poly_synth(0.5, 4, 11);
  const SynthConfig round = synth_config_from_json(to_json(cfg));
  CHECK(round.true_params.poly == cfg.true_params.poly);
  CHECK(round.speeds == cfg.speeds);
  CHECK(round.noise_sd_db == cfg.noise_sd_db);
  CHECK(round.replicate_count == cfg.replicate_count);
  CHECK(round.rng_seed == cfg.rng_seed);
  const Dataset x = synthesize(cfg), y = synthesize(round);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(x[i].spl_db == y[i].spl_db);
}
