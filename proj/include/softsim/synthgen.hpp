#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "softsim/linalg.hpp"

namespace softsim {

/// Parameters of the synthetic multi-camera identity generator.
struct GenConfig {
  int num_identities = 50;       // training identities
  int num_test_identities = 50;  // disjoint identities for query/gallery
  int images_per_identity = 8;   // tracklets per identity in video mode
  int num_cameras = 6;
  int height = 16;               // rows H
  int channels = 8;              // columns m
  int raw_parts = 4;             // vertical body segments P_raw
  int palette_size = 0;          // shared part appearances; 0 draws every part independently
  double identity_jitter = 0.35;
  double noise_sigma = 0.3;
  double camera_shift_scale = 0.4;
  bool video = false;
  int tracklet_length = 4;
  std::uint64_t seed = 7;

  bool operator==(const GenConfig&) const = default;
};

struct IdentitySpec {
  int id = 0;
  Matrix part_signatures;  // raw_parts x channels
};

struct CameraModel {
  int camera_id = 0;
  Vector channel_gain;
  Vector bias;
  double noise_sigma = 0.0;
};

struct SyntheticImage {
  Matrix pixels;          // height x channels
  int identity = -1;      // ground truth, only read by evaluation code
  int camera = -1;
  std::optional<int> tracklet;

  bool operator==(const SyntheticImage&) const = default;
};

struct Dataset {
  GenConfig config;
  std::vector<SyntheticImage> train;
  std::vector<SyntheticImage> query;
  std::vector<SyntheticImage> gallery;

  int num_cameras() const { return config.num_cameras; }
  std::uint64_t seed() const { return config.seed; }

  bool operator==(const Dataset&) const = default;
};

/// Throws ConfigError naming the offending field.
void validate(const GenConfig& cfg);

IdentitySpec make_identity(int id, const GenConfig& cfg, const Matrix& palette, std::mt19937_64& rng);
CameraModel make_camera(int camera_id, const GenConfig& cfg, std::mt19937_64& rng);

/// Repeats each part signature over its height / raw_parts rows, applies the
/// camera's per-channel gain and bias, then adds Gaussian noise.
SyntheticImage render_image(const IdentitySpec& identity, const CameraModel& camera, int height,
                            std::mt19937_64& rng);

Dataset generate_dataset(const GenConfig& cfg);

}  // namespace softsim
