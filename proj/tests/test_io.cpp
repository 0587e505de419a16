#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hvmc/errors.hpp"
#include "hvmc/io.hpp"
#include "hvmc/svg.hpp"
#include "hvmc/train.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace hvmc;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json base_config() {
  return json::parse(R"({
    "model": {"variant": "poincare_gru", "hidden": 7, "r_max": 0.7,
              "clamp_mode": "double", "marshall_sublattice": "odd"},
    "system": {"n": 12, "j1": 1.0, "j2": 0.2, "j3": 0.5},
    "train": {"epochs": 1200, "lr_hyperbolic": 0.008, "seed": 99},
    "output": {"dir": "runs/demo"}
  })");
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("hvmc_test_" + std::to_string(std::rand()) + std::to_string(std::rand()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

}  // namespace

TEST_CASE("config parsing applies documented defaults") {
  const ExperimentConfig cfg = config_from_json(base_config());
  CHECK(cfg.variant == CellVariant::poincare_gru);
  CHECK(cfg.hidden == 7);
  CHECK(cfg.geo.r_max == 0.7);
  CHECK(cfg.geo.l_max == 0.0);
  CHECK(cfg.geo.clamp_mode == ClampMode::double_clamp);
  CHECK(cfg.marshall == Sublattice::odd);
  CHECK_FALSE(cfg.phase_pi_scaling);
  CHECK(cfg.train.batch == 80);
  CHECK(cfg.train.lr_euclidean == 5e-3);
  CHECK(cfg.train.lr_hyperbolic == 8e-3);
  CHECK(cfg.train.plateau_factor == 2.0);
  CHECK(cfg.train.plateau_patience == 40);
  CHECK(cfg.train.early_stop_patience == 200);
  CHECK(cfg.train.eval_samples == 10000);
  CHECK(cfg.train.seed == 99);
  CHECK(cfg.system.j3 == 0.5);
}

TEST_CASE("config round-trips through json") {
  const ExperimentConfig cfg = config_from_json(base_config());
  const ExperimentConfig again = config_from_json(config_to_json(cfg));
  CHECK(cfg == again);
}

TEST_CASE("unknown keys and invalid values are rejected") {
  json j = base_config();
  j["model"]["colour"] = "blue";
  CHECK_THROWS_AS((void)config_from_json(j), ConfigError);

  j = base_config();
  j["extra"] = 1;
  CHECK_THROWS_AS((void)config_from_json(j), ConfigError);

  j = base_config();
  j["model"]["variant"] = "spherical_gru";
  CHECK_THROWS_AS((void)config_from_json(j), ConfigError);

  j = base_config();
  j["model"]["r_max"] = 1.5;
  CHECK_THROWS_AS((void)config_from_json(j), ConfigError);

  j = base_config();
  j["train"].erase("epochs");
  CHECK_THROWS_AS((void)config_from_json(j), ConfigError);

  j = base_config();
  j["train"]["plateau_factor"] = 0.5;
  CHECK_THROWS_AS((void)config_from_json(j), ConfigError);

  j = base_config();
  j["system"]["n"] = 1;
  CHECK_THROWS_AS((void)config_from_json(j), ConfigError);
}

TEST_CASE("checkpoints round-trip parameters bit-exactly") {
  TempDir tmp;
  GeoConfig geo;
  geo.r_max = 0.618;
  WavefunctionModel m =
      WavefunctionModel::make(CellVariant::poincare_rnn, 6, 9, geo, Sublattice::odd, true);
  Rng rng(17);
  m.set_params(init_params(m.layout, rng));
  const HeisenbergSpec spec{9, 1.0, 0.2, 0.1};

  save_checkpoint(tmp.path / "ck", m, spec, 123, -3.25, 42);
  const Checkpoint ck = load_checkpoint(tmp.path / "ck");
  CHECK(ck.epoch == 123);
  CHECK(ck.energy == -3.25);
  CHECK(ck.seed == 42);
  CHECK(ck.model.variant() == CellVariant::poincare_rnn);
  CHECK(ck.model.layout.hidden == 6);
  CHECK(ck.model.n_sites == 9);
  CHECK(ck.model.geo.r_max == 0.618);
  CHECK(ck.model.marshall == Sublattice::odd);
  CHECK(ck.model.phase_pi_scaling);
  CHECK(ck.system.j2 == 0.2);
  REQUIRE(ck.model.params.size() == m.params.size());
  for (Eigen::Index i = 0; i < m.params.size(); ++i) {
    CHECK(ck.model.params[i] == m.params[i]);  // bit-for-bit
  }
}

TEST_CASE("metrics are appendable and replay-parsable") {
  TempDir tmp;
  const fs::path file = tmp.path / "metrics.jsonl";
  std::vector<EpochRecord> recs;
  for (int e = 1; e <= 5; ++e) {
    EpochRecord r;
    r.epoch = e;
    r.energy = -1.0 - e * 0.25;
    r.variance = 0.5 / e;
    r.std_error = 0.1 / e;
    r.lr_euclidean = 5e-3;
    r.lr_hyperbolic = 8e-3;
    r.clamp_hits = e * 3;
    r.max_hidden_norm = 0.4 + 0.01 * e;
    r.improved = e % 2 == 0;
    r.checkpointed = e == 4;
    recs.push_back(r);
    append_metrics(file, r);
  }
  const auto got = read_metrics(file);
  REQUIRE(got.size() == recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    CHECK(got[i].epoch == recs[i].epoch);
    CHECK(got[i].energy == recs[i].energy);
    CHECK(got[i].variance == recs[i].variance);
    CHECK(got[i].clamp_hits == recs[i].clamp_hits);
    CHECK(got[i].max_hidden_norm == recs[i].max_hidden_norm);
    CHECK(got[i].improved == recs[i].improved);
    CHECK(got[i].checkpointed == recs[i].checkpointed);
  }
}

TEST_CASE("results accumulate as a json array") {
  TempDir tmp;
  const fs::path file = tmp.path / "result.json";
  append_result(file, EvalRecord{-4.2, 0.01, 10000, 7});
  append_result(file, EvalRecord{-4.25, 0.02, 5000, 8});
  const auto results = read_results(file);
  REQUIRE(results.size() == 2);
  CHECK(results[0].mean == -4.2);
  CHECK(results[1].samples == 5000);
  CHECK(results[1].seed == 8);
}

TEST_CASE("output root environment variable") {
  ::setenv("HVMC_OUTPUT_ROOT", "/some/root", 1);
  CHECK(resolve_output_dir("runs/x") == fs::path("/some/root/runs/x"));
  CHECK(resolve_output_dir("/abs/keep") == fs::path("/abs/keep"));
  ::unsetenv("HVMC_OUTPUT_ROOT");
  CHECK(resolve_output_dir("runs/x") == fs::path("runs/x"));
}

TEST_CASE("shipped presets parse to the documented experiment settings") {
  const fs::path configs = fs::path(HVMC_SOURCE_DIR) / "configs";

  const ExperimentConfig j1j2 = load_config(configs / "j1j2_gru.json");
  CHECK(j1j2.train.epochs == 1000);
  CHECK(j1j2.hidden == 70);
  CHECK(j1j2.system.n == 100);
  CHECK(j1j2.train.batch == 80);
  CHECK(load_config(configs / "j1j2_rnn.json").hidden == 70);

  const ExperimentConfig j3rnn = load_config(configs / "j1j2j3_rnn.json");
  CHECK(j3rnn.train.epochs == 1200);
  CHECK(j3rnn.hidden == 80);
  const ExperimentConfig j3gru = load_config(configs / "j1j2j3_gru.json");
  CHECK(j3gru.train.epochs == 1200);
  CHECK(j3gru.hidden == 70);

  const ExperimentConfig smoke = load_config(configs / "smoke.json");
  CHECK(smoke.system.n == 10);
  CHECK(smoke.train.epochs == 200);
}

TEST_CASE("svg output is deterministic") {
  std::vector<svg::RunPoint> pts{{"euclidean_gru", -43.41, 0.011}, {"lorentz_gru", -43.80, 0.006}};
  svg::PlotOptions opts;
  opts.title = "demo";
  const std::string a = svg::plot_dots(pts, opts);
  const std::string b = svg::plot_dots(pts, opts);
  CHECK(a == b);
  CHECK(a.find("<svg") == 0);
}

TEST_CASE("dots style draws one marker and error bar per run") {
  std::vector<svg::RunPoint> pts{{"a", -1.0, 0.1}, {"b", -2.0, 0.2}};
  const std::string doc = svg::plot_dots(pts);
  std::size_t markers = 0, errbars = 0, pos = 0;
  while ((pos = doc.find("class=\"marker\"", pos)) != std::string::npos) {
    ++markers;
    ++pos;
  }
  pos = 0;
  while ((pos = doc.find("class=\"errbar\"", pos)) != std::string::npos) {
    ++errbars;
    ++pos;
  }
  CHECK(markers == 2);
  CHECK(errbars == 2);
}

TEST_CASE("curves style carries a monotone best-energy envelope") {
  svg::Curve c;
  c.label = "run";
  for (int e = 1; e <= 30; ++e) {
    c.epochs.push_back(e);
    c.energies.push_back(-2.0 - 0.05 * e + ((e % 7) == 0 ? 0.4 : 0.0));
  }
  svg::PlotOptions opts;
  opts.inset = true;
  const std::string doc = svg::plot_curves({c}, opts);
  CHECK(doc.find("class=\"envelope\"") != std::string::npos);
  CHECK(doc.find("class=\"inset\"") != std::string::npos);

  // extract the envelope points and confirm the pixel y never moves up-energy
  const auto at = doc.find("class=\"envelope\"");
  const auto pts_begin = doc.find("points=\"", at) + 8;
  const auto pts_end = doc.find('"', pts_begin);
  std::istringstream stream(doc.substr(pts_begin, pts_end - pts_begin));
  std::string pair;
  double prev_y = -1e300;
  while (stream >> pair) {
    const double y = std::stod(pair.substr(pair.find(',') + 1));
    CHECK(y >= prev_y - 1e-9);  // lower energy sits lower only if monotone improving
    prev_y = y;
  }
}

TEST_CASE("ranking style sorts ascending by mean energy") {
  std::vector<svg::RunPoint> pts{
      {"worst", -1.0, 0.0}, {"best", -9.0, 0.0}, {"mid", -5.0, 0.0}};
  const std::string doc = svg::plot_ranking(pts);
  const auto best = doc.find(">best<");
  const auto mid = doc.find(">mid<");
  const auto worst = doc.find(">worst<");
  REQUIRE(best != std::string::npos);
  REQUIRE(mid != std::string::npos);
  REQUIRE(worst != std::string::npos);
  CHECK(best < mid);
  CHECK(mid < worst);
}
