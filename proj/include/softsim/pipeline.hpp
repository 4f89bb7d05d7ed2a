#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "softsim/encoder.hpp"
#include "softsim/eval.hpp"
#include "softsim/memory.hpp"
#include "softsim/similarity.hpp"
#include "softsim/softloss.hpp"
#include "softsim/synthgen.hpp"

namespace softsim {

struct Hyperparams {
  // classifier and soft labels
  double tau = 0.1;
  double lambda = 0.6;
  // reliable-set mining
  double lambda_p = 0.5;
  double lambda_c = 0.02;
  int k = 4;
  int p = 8;
  bool normalize_parts = true;
  // schedule
  int baseline_epochs = 25;
  int finetune_epochs = 2;
  int num_iterations = 15;
  int batch_size = 16;
  double lr = 0.1;
  double lr_final = 0.01;
  int lr_step_epoch = 15;
  double sgd_momentum = 0.9;
  // encoder
  int hidden = 32;
  int embed_dim = 16;
  double dropout = 0.5;
  bool finetune_dropout = true;
  // memory
  double memory_momentum = 0.5;
  bool update_memory_baseline = true;
  bool update_memory_finetune = true;
  bool reextract_memory = true;
  bool reinit_encoder = false;

  std::uint64_t seed = 7;

  DissimilarityConfig dissimilarity() const { return {lambda_p, lambda_c, k, p}; }
  bool operator==(const Hyperparams&) const = default;
};

/// Throws ConfigError naming the first offending field.
void validate(const Hyperparams& hp);

struct IterationMetrics {
  int iteration = 0;
  double rank1 = 0.0;
  double rank5 = 0.0;
  double rank10 = 0.0;
  double map = 0.0;
  double mean_loss = 0.0;               // over the last training epoch
  double cross_camera_fraction = 0.0;   // of mined neighbors; 0 for the baseline
  double reliable_precision = 0.0;      // same-identity fraction of mined neighbors (diagnostic)

  bool operator==(const IterationMetrics&) const = default;
};

struct TrainState {
  EncoderParams encoder;
  LookupTable table;
  int iteration = 0;  // completed outer iterations; 0 right after the baseline
  std::vector<IterationMetrics> history;

  bool operator==(const TrainState&) const = default;
};

/// Independent random stream for a (purpose, iteration, epoch, item) tuple so
/// results do not depend on evaluation order or thread count.
std::mt19937_64 derive_stream(std::uint64_t seed, std::uint64_t purpose, std::uint64_t a = 0, std::uint64_t b = 0,
                              std::uint64_t c = 0);

/// Eval-mode features for a set of images.
std::vector<ImageFeatures> extract_features(const EncoderParams& encoder, std::span<const SyntheticImage> images,
                                            const Hyperparams& hp);

/// Eval-mode features of the training split.
std::vector<ImageFeatures> extract_all(const TrainState& state, const Dataset& dataset, const Hyperparams& hp);

/// Hard-label training of a freshly initialized encoder.
TrainState train_baseline(const Dataset& dataset, const Hyperparams& hp);

enum class IterationMode {
  Softened,   // mine reliable sets and train on softened labels
  HardLabel,  // skip mining; continue baseline-style training
};

struct IterationOutcome {
  std::vector<ImageFeatures> snapshot;
  std::vector<ReliableSet> reliable;
  double mean_loss = 0.0;
};

/// One outer iteration: extract features, mine reliable sets (fixed for the
/// whole iteration), fine-tune on the resulting targets.
IterationOutcome run_iteration(TrainState& state, const Dataset& dataset, const Hyperparams& hp,
                               IterationMode mode = IterationMode::Softened);

/// Rank-1/5/10 and mAP of the current encoder on the test split. Video
/// datasets are scored per tracklet.
RankingResult evaluate_state(const TrainState& state, const Dataset& dataset, const Hyperparams& hp);

struct RunOptions {
  std::optional<std::filesystem::path> checkpoint_dir;
  IterationMode mode = IterationMode::Softened;
  std::function<void(const TrainState&, const IterationOutcome*)> on_iteration;
};

/// Baseline plus hp.num_iterations outer iterations, evaluated after each.
TrainState run(const Dataset& dataset, const Hyperparams& hp, const RunOptions& options = {});

/// Continues a loaded state up to hp.num_iterations completed iterations.
TrainState resume(TrainState state, const Dataset& dataset, const Hyperparams& hp, const RunOptions& options = {});

}  // namespace softsim
