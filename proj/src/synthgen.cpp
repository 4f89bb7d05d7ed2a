#include "softsim/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "softsim/errors.hpp"

namespace softsim {
namespace {

void require(bool ok, const char* field, const std::string& what) {
  if (!ok) throw ConfigError(fmt::format("generation.{}: {}", field, what));
}

Matrix make_palette(const GenConfig& cfg, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix palette(static_cast<std::size_t>(cfg.palette_size), static_cast<std::size_t>(cfg.channels));
  for (double& x : palette.values()) x = normal(rng);
  return palette;
}

}  // namespace

void validate(const GenConfig& cfg) {
  require(cfg.num_identities >= 1, "num_identities", "must be >= 1");
  require(cfg.num_test_identities >= 1, "num_test_identities", "must be >= 1");
  require(cfg.images_per_identity >= 2, "images_per_identity",
          "must be >= 2 so every query has a cross-camera gallery match");
  require(cfg.num_cameras >= 2, "num_cameras", "must be >= 2");
  require(cfg.height >= 1, "height", "must be >= 1");
  require(cfg.channels >= 1, "channels", "must be >= 1");
  require(cfg.raw_parts >= 1, "raw_parts", "must be >= 1");
  require(cfg.height % cfg.raw_parts == 0, "height",
          fmt::format("{} is not divisible by raw_parts = {}", cfg.height, cfg.raw_parts));
  require(cfg.palette_size >= 0, "palette_size", "must be >= 0");
  require(cfg.identity_jitter >= 0.0 && std::isfinite(cfg.identity_jitter), "identity_jitter",
          "must be finite and >= 0");
  require(cfg.noise_sigma >= 0.0 && std::isfinite(cfg.noise_sigma), "noise_sigma",
          "must be finite and >= 0");
  require(cfg.camera_shift_scale >= 0.0 && std::isfinite(cfg.camera_shift_scale),
          "camera_shift_scale", "must be finite and >= 0");
  require(cfg.tracklet_length >= 1, "tracklet_length", "must be >= 1");
}

IdentitySpec make_identity(int id, const GenConfig& cfg, const Matrix& palette, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  IdentitySpec spec;
  spec.id = id;
  spec.part_signatures = Matrix(static_cast<std::size_t>(cfg.raw_parts), static_cast<std::size_t>(cfg.channels));
  for (std::size_t part = 0; part < spec.part_signatures.rows(); ++part) {
    auto row = spec.part_signatures.row(part);
    if (palette.rows() == 0) {
      for (double& x : row) x = normal(rng);
      continue;
    }
    // Identities share garment appearances; the jitter keeps them distinct.
    std::uniform_int_distribution<std::size_t> pick(0, palette.rows() - 1);
    const auto base = palette.row(pick(rng));
    for (std::size_t c = 0; c < row.size(); ++c) row[c] = base[c] + cfg.identity_jitter * normal(rng);
  }
  return spec;
}

CameraModel make_camera(int camera_id, const GenConfig& cfg, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  CameraModel cam;
  cam.camera_id = camera_id;
  cam.noise_sigma = cfg.noise_sigma;
  cam.channel_gain.resize(static_cast<std::size_t>(cfg.channels));
  cam.bias.resize(static_cast<std::size_t>(cfg.channels));
  for (auto& g : cam.channel_gain) g = std::exp(0.5 * cfg.camera_shift_scale * normal(rng));
  for (auto& b : cam.bias) b = cfg.camera_shift_scale * normal(rng);
  return cam;
}

SyntheticImage render_image(const IdentitySpec& identity, const CameraModel& camera, int height,
                            std::mt19937_64& rng) {
  const std::size_t parts = identity.part_signatures.rows();
  const std::size_t channels = identity.part_signatures.cols();
  if (parts == 0 || height <= 0 || static_cast<std::size_t>(height) % parts != 0) {
    throw DataError(fmt::format("render_image: height {} is not a positive multiple of {} parts", height, parts));
  }
  if (camera.channel_gain.size() != channels || camera.bias.size() != channels) {
    throw DataError("render_image: camera channel count does not match identity signature");
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t rows_per_part = static_cast<std::size_t>(height) / parts;
  SyntheticImage img;
  img.identity = identity.id;
  img.camera = camera.camera_id;
  img.pixels = Matrix(static_cast<std::size_t>(height), channels);
  for (std::size_t r = 0; r < img.pixels.rows(); ++r) {
    const auto sig = identity.part_signatures.row(r / rows_per_part);
    for (std::size_t c = 0; c < channels; ++c) {
      double value = camera.channel_gain[c] * sig[c] + camera.bias[c];
      if (camera.noise_sigma > 0.0) value += camera.noise_sigma * normal(rng);
      img.pixels(r, c) = value;
    }
  }
  return img;
}

Dataset generate_dataset(const GenConfig& cfg) {
  validate(cfg);
  std::mt19937_64 rng(cfg.seed);

  Dataset ds;
  ds.config = cfg;

  const Matrix palette = make_palette(cfg, rng);
  std::vector<CameraModel> cameras;
  for (int c = 0; c < cfg.num_cameras; ++c) cameras.push_back(make_camera(c, cfg, rng));

  const int cams_per_identity =
      std::min(cfg.num_cameras, std::max(2, cfg.images_per_identity / 2));
  const int frames = cfg.video ? cfg.tracklet_length : 1;
  int train_tracklets = 0;
  int test_tracklets = 0;

  std::vector<int> camera_order(static_cast<std::size_t>(cfg.num_cameras));
  const int total = cfg.num_identities + cfg.num_test_identities;
  for (int id = 0; id < total; ++id) {
    const IdentitySpec identity = make_identity(id, cfg, palette, rng);
    std::iota(camera_order.begin(), camera_order.end(), 0);
    std::shuffle(camera_order.begin(), camera_order.end(), rng);

    // slot -> camera, round robin over this identity's cameras
    std::vector<std::vector<SyntheticImage>> slots;
    for (int slot = 0; slot < cfg.images_per_identity; ++slot) {
      const CameraModel& cam = cameras[static_cast<std::size_t>(camera_order[static_cast<std::size_t>(slot % cams_per_identity)])];
      std::vector<SyntheticImage> group;
      for (int f = 0; f < frames; ++f) group.push_back(render_image(identity, cam, cfg.height, rng));
      slots.push_back(std::move(group));
    }

    const bool is_train = id < cfg.num_identities;
    auto emit = [&](std::vector<SyntheticImage>& split, std::vector<SyntheticImage>& group, int& counter) {
      const int tracklet = counter++;
      for (auto& img : group) {
        if (cfg.video) img.tracklet = tracklet;
        split.push_back(std::move(img));
      }
    };

    if (is_train) {
      for (auto& group : slots) emit(ds.train, group, train_tracklets);
      continue;
    }

    // One query per camera that has a second slot left for the gallery.
    std::map<int, int> per_camera;
    for (const auto& group : slots) ++per_camera[group.front().camera];
    std::vector<bool> to_query(slots.size(), false);
    std::map<int, bool> taken;
    bool any = false;
    for (std::size_t s = 0; s < slots.size(); ++s) {
      const int cam = slots[s].front().camera;
      if (per_camera[cam] >= 2 && !taken[cam]) {
        taken[cam] = true;
        to_query[s] = true;
        any = true;
      }
    }
    if (!any) to_query[0] = true;
    for (std::size_t s = 0; s < slots.size(); ++s) {
      emit(to_query[s] ? ds.query : ds.gallery, slots[s], test_tracklets);
    }
  }
  return ds;
}

}  // namespace softsim
