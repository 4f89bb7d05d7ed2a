#include "softsim/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "softsim/errors.hpp"
#include "softsim/serialize.hpp"

namespace softsim {

namespace {

enum Purpose : std::uint64_t { kInit = 1, kShuffle = 2, kDropout = 3 };

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void check(bool ok, const char* field, const std::string& what) {
  if (!ok) throw ConfigError(fmt::format("hyperparams.{}: {}", field, what));
}

Matrix stack_globals(std::span<const ImageFeatures> features) {
  if (features.empty()) return {};
  Matrix out(features.size(), features.front().global.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    std::copy(features[i].global.begin(), features[i].global.end(), out.row(i).begin());
  }
  return out;
}

// Phase index 0 is the baseline; outer iteration t uses t.
struct EpochContext {
  int phase = 0;
  int epoch = 0;
  double lr = 0.0;
  bool dropout = true;
  bool update_memory = true;
};

struct SampleOutcome {
  Vector v;
  ParamSet grads;
  double loss = 0.0;
};

// One epoch over a seeded shuffle, in batches. Per-sample work in a batch runs
// in parallel against the frozen table; gradient reduction, the optimizer step
// and the memory writes happen afterwards in batch order.
double train_epoch(TrainState& state, const Dataset& dataset, const std::vector<TargetDistribution>& targets,
                   const Hyperparams& hp, const EpochContext& ctx) {
  const std::size_t n = dataset.train.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto shuffle_rng = derive_stream(hp.seed, kShuffle, static_cast<std::uint64_t>(ctx.phase),
                                   static_cast<std::uint64_t>(ctx.epoch));
  std::shuffle(order.begin(), order.end(), shuffle_rng);

  const std::size_t batch = static_cast<std::size_t>(hp.batch_size);
  double loss_sum = 0.0;
  std::vector<SampleOutcome> outcomes(batch);
  for (std::size_t start = 0; start < n; start += batch) {
    const std::size_t count = std::min(batch, n - start);
#pragma omp parallel for schedule(static)
    for (std::size_t b = 0; b < count; ++b) {
      const std::size_t i = order[start + b];
      auto rng = derive_stream(hp.seed, kDropout, static_cast<std::uint64_t>(ctx.phase),
                               static_cast<std::uint64_t>(ctx.epoch), start + b);
      ForwardResult fwd = forward(state.encoder, dataset.train[i].pixels, 1, ctx.dropout, rng);
      const Vector probs = state.table.class_probabilities(fwd.global);
      SampleOutcome& out = outcomes[b];
      out.loss = soft_cross_entropy(probs, targets[i]);
      const Vector grad_v = loss_grad_embedding(state.table, probs, targets[i].dense());
      out.grads = backward(state.encoder, fwd.cache, grad_v);
      out.v = std::move(fwd.global);
    }

    ParamSet total = outcomes[0].grads;
    auto acc = total.tensors();
    for (std::size_t b = 1; b < count; ++b) {
      const auto g = outcomes[b].grads.tensors();
      for (std::size_t t = 0; t < acc.size(); ++t) {
        for (std::size_t e = 0; e < acc[t].size(); ++e) acc[t][e] += g[t][e];
      }
    }
    const double scale = 1.0 / static_cast<double>(count);
    for (auto& t : acc) {
      for (double& x : t) x *= scale;
    }
    sgd_step(state.encoder, total, ctx.lr, hp.sgd_momentum);

    for (std::size_t b = 0; b < count; ++b) {
      loss_sum += outcomes[b].loss;
      if (ctx.update_memory) state.table.update_entry(order[start + b], outcomes[b].v);
    }
  }
  return n == 0 ? 0.0 : loss_sum / static_cast<double>(n);
}

EncoderParams fresh_encoder(const Dataset& dataset, const Hyperparams& hp, int phase) {
  auto rng = derive_stream(hp.seed, kInit, static_cast<std::uint64_t>(phase));
  return init_encoder(dataset.train.front().pixels.cols(), static_cast<std::size_t>(hp.hidden),
                      static_cast<std::size_t>(hp.embed_dim), hp.dropout, rng);
}

void write_iteration_checkpoint(const RunOptions& options, const TrainState& state, const Hyperparams& hp) {
  if (!options.checkpoint_dir) return;
  const auto path = *options.checkpoint_dir / fmt::format("iter_{:03d}.ckpt", state.iteration);
  try {
    save_checkpoint(path, {hp, state});
  } catch (const Error& e) {
    throw DataError(fmt::format("iteration {}: {}", state.iteration, e.what()));
  }
}

IterationMetrics metrics_row(const RankingResult& r, int iteration) {
  IterationMetrics m;
  m.iteration = iteration;
  m.rank1 = r.rank1;
  m.rank5 = r.rank5;
  m.rank10 = r.rank10;
  m.map = r.map;
  return m;
}

}  // namespace

void validate(const Hyperparams& hp) {
  check(hp.tau > 0.0 && std::isfinite(hp.tau), "tau", fmt::format("{} must be > 0", hp.tau));
  check(hp.lambda > 0.0 && hp.lambda <= 1.0, "lambda", fmt::format("{} is outside (0, 1]", hp.lambda));
  check(hp.lambda_p >= 0.0 && hp.lambda_p <= 1.0, "lambda_p", fmt::format("{} is outside [0, 1]", hp.lambda_p));
  check(hp.lambda_c >= 0.0 && std::isfinite(hp.lambda_c), "lambda_c", fmt::format("{} must be >= 0", hp.lambda_c));
  check(hp.k >= 0, "k", fmt::format("{} must be >= 0", hp.k));
  check(hp.p >= 1, "p", fmt::format("{} must be >= 1", hp.p));
  check(hp.baseline_epochs >= 0, "baseline_epochs", "must be >= 0");
  check(hp.finetune_epochs >= 0, "finetune_epochs", "must be >= 0");
  check(hp.num_iterations >= 0, "num_iterations", "must be >= 0");
  check(hp.batch_size >= 1, "batch_size", "must be >= 1");
  check(hp.lr > 0.0 && std::isfinite(hp.lr), "lr", "must be > 0");
  check(hp.lr_final > 0.0 && std::isfinite(hp.lr_final), "lr_final", "must be > 0");
  check(hp.lr_step_epoch >= 0, "lr_step_epoch", "must be >= 0");
  check(hp.sgd_momentum >= 0.0 && hp.sgd_momentum < 1.0, "sgd_momentum", "must be in [0, 1)");
  check(hp.hidden >= 1, "hidden", "must be >= 1");
  check(hp.embed_dim >= 1, "embed_dim", "must be >= 1");
  check(hp.dropout >= 0.0 && hp.dropout < 1.0, "dropout", "must be in [0, 1)");
  check(hp.memory_momentum >= 0.0 && hp.memory_momentum <= 1.0, "memory_momentum", "must be in [0, 1]");
}

std::mt19937_64 derive_stream(std::uint64_t seed, std::uint64_t purpose, std::uint64_t a, std::uint64_t b,
                              std::uint64_t c) {
  std::uint64_t h = splitmix(seed);
  for (std::uint64_t x : {purpose, a, b, c}) h = splitmix(h ^ x);
  return std::mt19937_64(h);
}

std::vector<ImageFeatures> extract_features(const EncoderParams& encoder, std::span<const SyntheticImage> images,
                                            const Hyperparams& hp) {
  std::vector<ImageFeatures> out(images.size());
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < images.size(); ++i) {
    std::mt19937_64 unused(0);
    ForwardResult fwd = forward(encoder, images[i].pixels, hp.p, false, unused);
    out[i].global = std::move(fwd.global);
    out[i].parts = hp.normalize_parts ? std::move(fwd.parts) : std::move(fwd.raw_parts);
    out[i].camera = images[i].camera;
  }
  return out;
}

std::vector<ImageFeatures> extract_all(const TrainState& state, const Dataset& dataset, const Hyperparams& hp) {
  return extract_features(state.encoder, dataset.train, hp);
}

TrainState train_baseline(const Dataset& dataset, const Hyperparams& hp) {
  validate(hp);
  if (dataset.train.empty()) throw DataError("train_baseline: empty training split");
  TrainState state;
  state.encoder = fresh_encoder(dataset, hp, 0);
  const auto features = extract_all(state, dataset, hp);
  state.table = LookupTable::from_features(stack_globals(features), hp.tau, hp.memory_momentum);

  const std::size_t n = dataset.train.size();
  std::vector<TargetDistribution> targets;
  targets.reserve(n);
  for (std::size_t i = 0; i < n; ++i) targets.push_back(one_hot_target(i, n));

  for (int epoch = 0; epoch < hp.baseline_epochs; ++epoch) {
    EpochContext ctx;
    ctx.phase = 0;
    ctx.epoch = epoch;
    ctx.lr = epoch < hp.lr_step_epoch ? hp.lr : hp.lr_final;
    ctx.dropout = true;
    ctx.update_memory = hp.update_memory_baseline;
    train_epoch(state, dataset, targets, hp, ctx);
  }
  state.iteration = 0;
  return state;
}

IterationOutcome run_iteration(TrainState& state, const Dataset& dataset, const Hyperparams& hp, IterationMode mode) {
  validate(hp);
  const int phase = state.iteration + 1;
  const std::size_t n = dataset.train.size();
  if (state.table.size() != n) throw DataError("run_iteration: lookup table does not match the training split");

  IterationOutcome outcome;
  outcome.snapshot = extract_all(state, dataset, hp);
  if (hp.reextract_memory) {
    state.table = LookupTable::from_features(stack_globals(outcome.snapshot), hp.tau, hp.memory_momentum);
  }
  if (hp.reinit_encoder) state.encoder = fresh_encoder(dataset, hp, phase);

  std::vector<TargetDistribution> targets;
  targets.reserve(n);
  if (mode == IterationMode::Softened) {
    outcome.reliable = select_all_reliable(outcome.snapshot, hp.dissimilarity());
    for (std::size_t i = 0; i < n; ++i) targets.push_back(build_target(i, outcome.reliable[i].indices(), hp.lambda, n));
  } else {
    for (std::size_t i = 0; i < n; ++i) targets.push_back(one_hot_target(i, n));
  }

  for (int epoch = 0; epoch < hp.finetune_epochs; ++epoch) {
    EpochContext ctx;
    ctx.phase = phase;
    ctx.epoch = epoch;
    ctx.lr = hp.lr_final;
    ctx.dropout = hp.finetune_dropout;
    ctx.update_memory = hp.update_memory_finetune;
    outcome.mean_loss = train_epoch(state, dataset, targets, hp, ctx);
  }
  state.iteration = phase;
  return outcome;
}

RankingResult evaluate_state(const TrainState& state, const Dataset& dataset, const Hyperparams& hp) {
  auto embed = [&](std::span<const SyntheticImage> images, std::vector<Vector>& vectors, std::vector<ItemMeta>& meta) {
    const auto features = extract_features(state.encoder, images, hp);
    if (!dataset.config.video) {
      for (std::size_t i = 0; i < images.size(); ++i) {
        vectors.push_back(features[i].global);
        meta.push_back({images[i].identity, images[i].camera});
      }
      return;
    }
    // Frames of a tracklet are contiguous; group by id in order of appearance.
    std::map<int, std::size_t> slot;
    std::vector<std::vector<Vector>> frames;
    for (std::size_t i = 0; i < images.size(); ++i) {
      const int id = images[i].tracklet.value_or(-1 - static_cast<int>(i));
      auto [it, inserted] = slot.try_emplace(id, frames.size());
      if (inserted) {
        frames.emplace_back();
        meta.push_back({images[i].identity, images[i].camera});
      }
      frames[it->second].push_back(features[i].global);
    }
    for (const auto& f : frames) vectors.push_back(tracklet_feature(f));
  };
  std::vector<Vector> query, gallery;
  std::vector<ItemMeta> query_meta, gallery_meta;
  embed(dataset.query, query, query_meta);
  embed(dataset.gallery, gallery, gallery_meta);
  return evaluate(query, query_meta, gallery, gallery_meta);
}

TrainState resume(TrainState state, const Dataset& dataset, const Hyperparams& hp, const RunOptions& options) {
  while (state.iteration < hp.num_iterations) {
    const IterationOutcome outcome = run_iteration(state, dataset, hp, options.mode);
    IterationMetrics m = metrics_row(evaluate_state(state, dataset, hp), state.iteration);
    m.mean_loss = outcome.mean_loss;
    if (!outcome.reliable.empty()) {
      m.cross_camera_fraction = cross_camera_fraction(outcome.snapshot, outcome.reliable);
      std::size_t total = 0, same = 0;
      for (const auto& set : outcome.reliable) {
        for (const auto& nb : set.neighbors) {
          ++total;
          if (dataset.train[nb.index].identity == dataset.train[set.anchor].identity) ++same;
        }
      }
      m.reliable_precision = total == 0 ? 0.0 : static_cast<double>(same) / static_cast<double>(total);
    }
    state.history.push_back(m);
    write_iteration_checkpoint(options, state, hp);
    if (options.on_iteration) options.on_iteration(state, &outcome);
  }
  return state;
}

TrainState run(const Dataset& dataset, const Hyperparams& hp, const RunOptions& options) {
  TrainState state = train_baseline(dataset, hp);
  state.history.push_back(metrics_row(evaluate_state(state, dataset, hp), 0));
  write_iteration_checkpoint(options, state, hp);
  if (options.on_iteration) options.on_iteration(state, nullptr);
  return resume(std::move(state), dataset, hp, options);
}

}  // namespace softsim
