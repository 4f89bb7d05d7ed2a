// Command-line front end: generate | train | mine | eval | sweep

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "softsim/config.hpp"
#include "softsim/errors.hpp"
#include "softsim/pipeline.hpp"
#include "softsim/serialize.hpp"
#include "softsim/similarity.hpp"

namespace fs = std::filesystem;
using namespace softsim;

namespace {

enum ExitCode : int { kOk = 0, kFailure = 1, kConfigError = 2, kDataError = 3, kNumericError = 4 };

RunConfig load_run_config(const std::string& path) {
  return path.empty() ? parse_config_text("") : parse_config(path);
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot open '{}' for writing", path.string()));
  return out;
}

Dataset dataset_for(const RunConfig& cfg, const std::string& dataset_path) {
  if (dataset_path.empty()) return generate_dataset(cfg.generation);
  Dataset ds = load_dataset(dataset_path);
  if (ds.config.height % cfg.hyperparams.p != 0) {
    throw ConfigError(fmt::format("hyperparams.p: {} does not divide dataset height {}", cfg.hyperparams.p,
                                  ds.config.height));
  }
  return ds;
}

void write_metrics_files(const fs::path& dir, const std::vector<IterationMetrics>& history) {
  auto csv = open_out(dir / "metrics.csv");
  write_metrics_csv(csv, history);
  auto records = open_out(dir / "metrics.yaml");
  write_metrics_records(records, history);
}

int cmd_generate(const std::string& config_path, const std::string& out_path, int seed_override) {
  RunConfig cfg = load_run_config(config_path);
  if (seed_override >= 0) cfg.generation.seed = static_cast<std::uint64_t>(seed_override);
  const Dataset ds = generate_dataset(cfg.generation);
  save_dataset(out_path, ds);
  std::cout << fmt::format("wrote {} (train {}, query {}, gallery {})\n", out_path, ds.train.size(), ds.query.size(),
                           ds.gallery.size());
  return kOk;
}

int cmd_train(const std::string& config_path, const std::string& output, const std::string& preset, bool video,
              const std::string& dataset_path) {
  RunConfig cfg = load_run_config(config_path);
  if (!preset.empty()) {
    cfg.preset = parse_preset(preset);
    apply_preset(cfg.hyperparams, cfg.preset);
  }
  if (video && !cfg.generation.video) {
    cfg.generation.video = true;
    // re-resolve so the video-mode epoch default applies when not set explicitly
    std::string text = resolved_config_text(cfg);
    cfg = parse_config_text(text);
  }
  if (!output.empty()) cfg.output_dir = output;
  validate(cfg);

  const fs::path dir = cfg.output_dir;
  fs::create_directories(dir / "checkpoints");
  {
    auto out = open_out(dir / "resolved_config.yaml");
    out << resolved_config_text(cfg);
    auto seed = open_out(dir / "seed.txt");
    seed << cfg.hyperparams.seed << '\n';
  }

  const Dataset ds = dataset_for(cfg, dataset_path);
  RunOptions options;
  options.checkpoint_dir = dir / "checkpoints";
  options.on_iteration = [&](const TrainState& state, const IterationOutcome*) {
    const auto& m = state.history.back();
    std::cout << fmt::format("iteration {:3d}  rank1 {:.4f}  rank5 {:.4f}  rank10 {:.4f}  mAP {:.4f}\n", m.iteration,
                             m.rank1, m.rank5, m.rank10, m.map)
              << std::flush;
    write_metrics_files(dir, state.history);
  };
  const TrainState final_state = run(ds, cfg.hyperparams, options);
  save_checkpoint(dir / "final.ckpt", {cfg.hyperparams, final_state});
  return kOk;
}

int cmd_mine(const std::string& checkpoint, const std::string& dataset_path, const std::string& out_path) {
  const Checkpoint ckpt = load_checkpoint(checkpoint);
  const Dataset ds = load_dataset(dataset_path);
  const Hyperparams& hp = ckpt.hyperparams;
  const auto features = extract_all(ckpt.state, ds, hp);
  const auto sets = select_all_reliable(features, hp.dissimilarity());
  auto out = open_out(out_path);
  CsvWriter csv(out);
  csv.row({"anchor", "rank", "neighbor", "D", "d", "d_part", "cce", "anchor_camera", "neighbor_camera",
           "same_identity"});
  for (const auto& set : sets) {
    for (std::size_t r = 0; r < set.neighbors.size(); ++r) {
      const Neighbor& n = set.neighbors[r];
      csv.row({std::to_string(set.anchor), std::to_string(r), std::to_string(n.index), format_double(n.dissimilarity),
               format_double(n.global), format_double(n.part), format_double(n.cce),
               std::to_string(ds.train[set.anchor].camera), std::to_string(ds.train[n.index].camera),
               ds.train[set.anchor].identity == ds.train[n.index].identity ? "1" : "0"});
    }
  }
  std::cout << fmt::format("cross-camera fraction {:.4f}\n", cross_camera_fraction(features, sets));
  return kOk;
}

int cmd_eval(const std::string& checkpoint, const std::string& dataset_path, const std::string& out_path,
             const std::string& detail_path) {
  const Checkpoint ckpt = load_checkpoint(checkpoint);
  const Dataset ds = load_dataset(dataset_path);
  const RankingResult r = evaluate_state(ckpt.state, ds, ckpt.hyperparams);
  {
    auto out = open_out(out_path);
    CsvWriter csv(out);
    csv.row({"iteration", "rank1", "rank5", "rank10", "mAP"});
    csv.row({std::to_string(ckpt.state.iteration), format_double(r.rank1), format_double(r.rank5),
             format_double(r.rank10), format_double(r.map)});
  }
  if (!detail_path.empty()) {
    auto out = open_out(detail_path);
    CsvWriter csv(out);
    csv.row({"query", "first_match", "num_matches", "average_precision"});
    for (const auto& q : r.per_query) {
      csv.row({std::to_string(q.query), std::to_string(q.first_match), std::to_string(q.num_matches),
               format_double(q.average_precision)});
    }
  }
  std::cout << fmt::format("rank1 {:.4f}  rank5 {:.4f}  rank10 {:.4f}  mAP {:.4f}\n", r.rank1, r.rank5, r.rank10,
                           r.map);
  return kOk;
}

int cmd_sweep(const std::string& config_path, const std::string& param, const std::vector<double>& values,
              const std::string& out_path, const std::string& dataset_path) {
  const RunConfig cfg = load_run_config(config_path);
  const Dataset ds = dataset_for(cfg, dataset_path);
  const auto rows = sweep(param, values, cfg, ds);
  auto out = open_out(out_path);
  write_sweep_csv(out, rows);
  for (const auto& r : rows) {
    std::cout << fmt::format("{}={}  baseline rank1 {:.4f}  final rank1 {:.4f}  mAP {:.4f}\n", param,
                             format_double(r.value), r.baseline.rank1, r.final.rank1, r.final.map);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Softened-similarity unsupervised embedding learning on synthetic re-identification data"};
  app.require_subcommand(1);

  std::string config_path, out_path, output_dir, preset, dataset_path, checkpoint, detail_path, param;
  int seed = -1;
  bool video = false;
  std::vector<double> values;

  auto* gen = app.add_subcommand("generate", "Write a synthetic dataset file");
  gen->add_option("-c,--config", config_path, "Run config (generation block is used)");
  gen->add_option("-o,--out", out_path, "Dataset file to write")->required();
  gen->add_option("--seed", seed, "Override generation.seed");

  auto* train = app.add_subcommand("train", "Baseline plus iterative softened-similarity training");
  train->add_option("-c,--config", config_path, "Run config");
  train->add_option("-o,--output", output_dir, "Output directory (overrides run.output_dir)");
  train->add_option("--preset", preset, "baseline | no-part-no-cce | no-part | full");
  train->add_flag("--video", video, "Generate tracklets and evaluate per tracklet");
  train->add_option("-d,--dataset", dataset_path, "Use a dataset file instead of generating one");

  auto* mine = app.add_subcommand("mine", "Dump reliable sets with their dissimilarity breakdown as CSV");
  mine->add_option("--checkpoint", checkpoint)->required();
  mine->add_option("-d,--dataset", dataset_path)->required();
  mine->add_option("-o,--out", out_path)->required();

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on the test split");
  eval->add_option("--checkpoint", checkpoint)->required();
  eval->add_option("-d,--dataset", dataset_path)->required();
  eval->add_option("-o,--out", out_path)->required();
  eval->add_option("--detail", detail_path, "Per-query CSV");

  auto* sw = app.add_subcommand("sweep", "Run the pipeline once per parameter value");
  sw->add_option("-c,--config", config_path, "Base run config");
  sw->add_option("--param", param, "lambda | k | lambda_c | lambda_p | p | iterations")->required();
  sw->add_option("--values", values, "Comma-separated values")->required()->delimiter(',');
  sw->add_option("-o,--out", out_path)->required();
  sw->add_option("-d,--dataset", dataset_path, "Use a dataset file instead of generating one");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (gen->parsed()) return cmd_generate(config_path, out_path, seed);
    if (train->parsed()) return cmd_train(config_path, output_dir, preset, video, dataset_path);
    if (mine->parsed()) return cmd_mine(checkpoint, dataset_path, out_path);
    if (eval->parsed()) return cmd_eval(checkpoint, dataset_path, out_path, detail_path);
    if (sw->parsed()) return cmd_sweep(config_path, param, values, out_path, dataset_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumericError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
