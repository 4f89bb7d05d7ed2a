#include <doctest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "softsim/errors.hpp"
#include "softsim/synthgen.hpp"

using namespace softsim;

namespace {

// Mean pixel-grid distance over same-identity pairs split by camera relation,
// computed over every pair of the training split.
std::pair<double, double> camera_distance_means(const Dataset& ds) {
  double cross = 0.0, within = 0.0;
  std::size_t n_cross = 0, n_within = 0;
  for (std::size_t i = 0; i < ds.train.size(); ++i) {
    for (std::size_t j = i + 1; j < ds.train.size(); ++j) {
      const auto& a = ds.train[i];
      const auto& b = ds.train[j];
      if (a.identity != b.identity) continue;
      const double d = oracle::l2(a.pixels.values(), b.pixels.values());
      if (a.camera == b.camera) {
        within += d;
        ++n_within;
      } else {
        cross += d;
        ++n_cross;
      }
    }
  }
  return {cross / static_cast<double>(n_cross), within / static_cast<double>(n_within)};
}

}  // namespace

constexpr double kFrozenCameraRatio = 1.7591358875548193;

TEST_CASE("generation is deterministic for a fixed seed") {
  GenConfig cfg;
  cfg.seed = 7;
  CHECK(generate_dataset(cfg) == generate_dataset(cfg));
  GenConfig other = cfg;
  other.seed = 8;
  CHECK_FALSE(generate_dataset(cfg) == generate_dataset(other));
}

TEST_CASE("noise-free, shift-free generator renders identical grids per identity") {
  GenConfig cfg;
  cfg.noise_sigma = 0.0;
  cfg.camera_shift_scale = 0.0;
  const Dataset ds = generate_dataset(cfg);
  for (const auto& a : ds.train) {
    for (const auto& b : ds.train) {
      if (a.identity == b.identity) CHECK(a.pixels == b.pixels);
    }
  }
}

TEST_CASE("cross-camera same-identity distance exceeds within-camera distance") {
  const Dataset ds = generate_dataset(GenConfig{});
  const auto [cross, within] = camera_distance_means(ds);
  CHECK(cross > within);
  // Frozen from the brute-force pass above on the default config.
  CHECK(cross / within == doctest::Approx(kFrozenCameraRatio).epsilon(1e-12));
}

TEST_CASE("camera separation without noise") {
  GenConfig cfg;
  cfg.noise_sigma = 0.0;
  const Dataset ds = generate_dataset(cfg);
  for (int id = 0; id < cfg.num_identities; ++id) {
    double max_within = 0.0, min_cross = 1e300;
    for (const auto& a : ds.train) {
      if (a.identity != id) continue;
      for (const auto& b : ds.train) {
        if (b.identity != id || &a == &b) continue;
        const double d = oracle::l2(a.pixels.values(), b.pixels.values());
        if (a.camera == b.camera) max_within = std::max(max_within, d);
        else min_cross = std::min(min_cross, d);
      }
    }
    CHECK(min_cross > max_within);
  }
}

TEST_CASE("splits are identity-disjoint and every query has a cross-camera gallery match") {
  const Dataset ds = generate_dataset(GenConfig{});
  std::set<int> train_ids;
  for (const auto& img : ds.train) train_ids.insert(img.identity);
  for (const auto& img : ds.query) CHECK_FALSE(train_ids.contains(img.identity));
  for (const auto& img : ds.gallery) CHECK_FALSE(train_ids.contains(img.identity));
  for (const auto& q : ds.query) {
    bool found = false;
    for (const auto& g : ds.gallery) found |= g.identity == q.identity && g.camera != q.camera;
    CHECK(found);
  }
  // each identity spans at least two cameras
  for (int id : train_ids) {
    std::set<int> cams;
    for (const auto& img : ds.train) {
      if (img.identity == id) cams.insert(img.camera);
    }
    CHECK(cams.size() >= 2);
  }
  CHECK(ds.train.size() == 50u * 8u);
}

TEST_CASE("render_image follows gain, bias and noise") {
  IdentitySpec id;
  id.part_signatures = Matrix(2, 3);
  id.part_signatures.values() = {1, 0, 0, 0, 1, 0};
  CameraModel cam{0, {1, 1, 1}, {0, 0, 0}, 0.0};
  std::mt19937_64 rng(1);

  SUBCASE("unit gain, zero bias, no noise gives stacked signatures") {
    const auto img = render_image(id, cam, 4, rng);
    for (std::size_t r = 0; r < 4; ++r) {
      for (std::size_t c = 0; c < 3; ++c) CHECK(img.pixels(r, c) == id.part_signatures(r / 2, c));
    }
  }
  SUBCASE("two biases differ by exactly the bias difference") {
    CameraModel other{1, {1, 1, 1}, {0.5, -1.0, 2.0}, 0.0};
    const auto a = render_image(id, cam, 4, rng);
    const auto b = render_image(id, other, 4, rng);
    for (std::size_t r = 0; r < 4; ++r) {
      for (std::size_t c = 0; c < 3; ++c) CHECK(b.pixels(r, c) - a.pixels(r, c) == other.bias[c]);
    }
  }
  SUBCASE("Monte Carlo pixel std matches sigma") {
    cam.noise_sigma = 0.1;
    const int renders = 1000;
    Matrix sum(4, 3), sq(4, 3);
    for (int i = 0; i < renders; ++i) {
      const auto img = render_image(id, cam, 4, rng);
      for (std::size_t e = 0; e < sum.size(); ++e) {
        sum.values()[e] += img.pixels.values()[e];
        sq.values()[e] += img.pixels.values()[e] * img.pixels.values()[e];
      }
    }
    for (std::size_t e = 0; e < sum.size(); ++e) {
      const double mean = sum.values()[e] / renders;
      const double sd = std::sqrt(sq.values()[e] / renders - mean * mean);
      CHECK(std::abs(sd - 0.1) < 0.005);
    }
  }
  SUBCASE("height must be a multiple of the part count") { CHECK_THROWS_AS(render_image(id, cam, 3, rng), DataError); }
}

TEST_CASE("invalid generator configs are rejected") {
  GenConfig cfg;
  cfg.height = 15;
  CHECK_THROWS_AS(generate_dataset(cfg), ConfigError);
  cfg = GenConfig{};
  cfg.num_cameras = 1;
  CHECK_THROWS_AS(generate_dataset(cfg), ConfigError);
}

TEST_CASE("video mode groups frames into single-camera tracklets") {
  GenConfig cfg;
  cfg.video = true;
  cfg.num_identities = 5;
  cfg.num_test_identities = 5;
  const Dataset ds = generate_dataset(cfg);
  CHECK(ds.train.size() == 5u * 8u * 4u);
  for (std::size_t i = 0; i < ds.train.size(); i += 4) {
    for (std::size_t f = 1; f < 4; ++f) {
      CHECK(ds.train[i + f].tracklet == ds.train[i].tracklet);
      CHECK(ds.train[i + f].camera == ds.train[i].camera);
    }
  }
}
