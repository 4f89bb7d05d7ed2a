#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "softsim/config.hpp"
#include "softsim/errors.hpp"

using namespace softsim;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("an empty config resolves to the published defaults") {
  const RunConfig cfg = parse_config_text("");
  const Hyperparams& hp = cfg.hyperparams;
  CHECK(hp.tau == 0.1);
  CHECK(hp.lambda == 0.6);
  CHECK(hp.lambda_p == 0.5);
  CHECK(hp.lambda_c == 0.02);
  CHECK(hp.p == 8);
  CHECK(hp.k == 4);
  CHECK(hp.batch_size == 16);
  CHECK(hp.sgd_momentum == 0.9);
  CHECK(hp.dropout == 0.5);
  CHECK(hp.baseline_epochs == 25);
  CHECK(hp.lr == 0.1);
  CHECK(hp.lr_final == 0.01);
  CHECK(hp.lr_step_epoch == 15);
  CHECK(cfg.preset == Preset::Full);
}

TEST_CASE("errors name the offending key") {
  CHECK(error_of("hyperparams:\n  lambda: 1.5\n").find("lambda") != std::string::npos);
  CHECK(error_of("hyperparams:\n  lambada: 0.5\n").find("hyperparams.lambada") != std::string::npos);
  CHECK(error_of("generation:\n  height: 12\n").find("hyperparams.p") != std::string::npos);
  CHECK(error_of("generation:\n  num_cameras: 1\n").find("generation.num_cameras") != std::string::npos);
  CHECK(error_of("hyperparams:\n  k: two\n").find("hyperparams.k") != std::string::npos);
  CHECK(error_of("run:\n  preset: everything\n").find("run.preset") != std::string::npos);
  CHECK(error_of("bogus: 1\n").find("bogus") != std::string::npos);
  CHECK_THROWS_AS(parse_config("/nonexistent/config.yaml"), ConfigError);
}

TEST_CASE("the resolved config parses back to the same RunConfig") {
  const std::string text =
      "generation:\n  seed: 11\n  noise_sigma: 0.123456789012345\nhyperparams:\n  lambda_c: 0.07\n  k: 2\n"
      "run:\n  preset: no-part\n  output_dir: \"out, with comma\"\n";
  const RunConfig cfg = parse_config_text(text);
  CHECK(cfg.hyperparams.lambda_p == 0.0);
  CHECK(cfg.generation.noise_sigma == 0.123456789012345);
  const std::string resolved = resolved_config_text(cfg);
  CHECK(parse_config_text(resolved) == cfg);
  CHECK(resolved_config_text(parse_config_text(resolved)) == resolved);

  const auto path = std::filesystem::temp_directory_path() / "softsim_config_test.yaml";
  std::ofstream(path) << resolved;
  CHECK(parse_config(path) == cfg);
  std::filesystem::remove(path);
}

TEST_CASE("video mode defaults to 30 baseline epochs unless set") {
  CHECK(parse_config_text("run:\n  video: true\n").hyperparams.baseline_epochs == 30);
  CHECK(parse_config_text("run:\n  video: true\nhyperparams:\n  baseline_epochs: 3\n").hyperparams.baseline_epochs == 3);
}

TEST_CASE("presets") {
  Hyperparams hp;
  apply_preset(hp, Preset::Baseline);
  CHECK(hp.lambda == 1.0);
  CHECK(hp.k == 0);
  hp = {};
  apply_preset(hp, Preset::NoPartNoCce);
  CHECK(hp.lambda_p == 0.0);
  CHECK(hp.lambda_c == 0.0);
  hp = {};
  apply_preset(hp, Preset::NoPart);
  CHECK(hp.lambda_p == 0.0);
  CHECK(hp.lambda_c == 0.02);
  for (auto p : {Preset::Baseline, Preset::NoPartNoCce, Preset::NoPart, Preset::Full}) {
    CHECK(parse_preset(preset_name(p)) == p);
  }
}

TEST_CASE("sweepable parameters") {
  const Hyperparams base;
  CHECK(with_param(base, "k", 8).k == 8);
  CHECK(with_param(base, "iterations", 3).num_iterations == 3);
  CHECK(with_param(base, "lambda_c", 0.1).lambda_c == 0.1);
  CHECK_THROWS_AS(with_param(base, "k", 2.5), ConfigError);
  CHECK_THROWS_AS(with_param(base, "tau", 0.2), ConfigError);
  CHECK_THROWS_AS(with_param(base, "lambda", 0.0), ConfigError);
}

TEST_CASE("sweeps produce one row per value") {
  GenConfig g;
  g.num_identities = 5;
  g.num_test_identities = 4;
  const Dataset ds = generate_dataset(g);
  RunConfig base;
  Hyperparams& hp = base.hyperparams;
  hp.baseline_epochs = 2;
  hp.num_iterations = 1;
  const auto rows = sweep("k", {0, 1, 2, 4, 8}, base, ds);
  REQUIRE(rows.size() == 5);
  CHECK(rows[3].value == 4.0);
  // the baseline does not depend on k
  for (const auto& r : rows) CHECK(r.baseline == rows[0].baseline);

  // a single stripe makes the part term a copy of the global one
  hp.lambda_p = 1.0;
  const auto one_stripe = sweep("p", {1}, base, ds);
  const auto no_part = sweep("lambda_p", {0}, base, ds);
  CHECK(one_stripe[0].final == no_part[0].final);
}
