#pragma once

#include <concepts>
#include <type_traits>

#include "softsim/pipeline.hpp"
#include "softsim/synthgen.hpp"

// Field-by-field reflection for the config structs, shared by the config
// parser, the resolved-config echo and the file headers.
namespace softsim {

template <typename Config, typename Visitor>
  requires std::same_as<std::remove_const_t<Config>, GenConfig>
void visit_fields(Config& c, Visitor&& visit) {
  visit("num_identities", c.num_identities);
  visit("num_test_identities", c.num_test_identities);
  visit("images_per_identity", c.images_per_identity);
  visit("num_cameras", c.num_cameras);
  visit("height", c.height);
  visit("channels", c.channels);
  visit("raw_parts", c.raw_parts);
  visit("palette_size", c.palette_size);
  visit("identity_jitter", c.identity_jitter);
  visit("noise_sigma", c.noise_sigma);
  visit("camera_shift_scale", c.camera_shift_scale);
  visit("video", c.video);
  visit("tracklet_length", c.tracklet_length);
  visit("seed", c.seed);
}

template <typename Config, typename Visitor>
  requires std::same_as<std::remove_const_t<Config>, Hyperparams>
void visit_fields(Config& h, Visitor&& visit) {
  visit("tau", h.tau);
  visit("lambda", h.lambda);
  visit("lambda_p", h.lambda_p);
  visit("lambda_c", h.lambda_c);
  visit("k", h.k);
  visit("p", h.p);
  visit("normalize_parts", h.normalize_parts);
  visit("baseline_epochs", h.baseline_epochs);
  visit("finetune_epochs", h.finetune_epochs);
  visit("num_iterations", h.num_iterations);
  visit("batch_size", h.batch_size);
  visit("lr", h.lr);
  visit("lr_final", h.lr_final);
  visit("lr_step_epoch", h.lr_step_epoch);
  visit("sgd_momentum", h.sgd_momentum);
  visit("hidden", h.hidden);
  visit("embed_dim", h.embed_dim);
  visit("dropout", h.dropout);
  visit("finetune_dropout", h.finetune_dropout);
  visit("memory_momentum", h.memory_momentum);
  visit("update_memory_baseline", h.update_memory_baseline);
  visit("update_memory_finetune", h.update_memory_finetune);
  visit("reextract_memory", h.reextract_memory);
  visit("reinit_encoder", h.reinit_encoder);
  visit("seed", h.seed);
}

}  // namespace softsim
