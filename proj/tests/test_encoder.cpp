#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "softsim/encoder.hpp"
#include "softsim/errors.hpp"
#include "softsim/memory.hpp"
#include "softsim/softloss.hpp"

using namespace softsim;

namespace {

Matrix random_image(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (double& x : m.values()) x = n(rng);
  return m;
}

EncoderParams small_encoder(std::mt19937_64& rng, double dropout = 0.0) {
  EncoderParams p = init_encoder(3, 4, 2, dropout, rng);
  std::normal_distribution<double> n(0.0, 0.3);
  for (double& b : p.weights.b1) b = n(rng);
  for (double& b : p.weights.b2) b = n(rng);
  return p;
}

double min_abs_preactivation(const ForwardCache& c) {
  double m = 1e300;
  for (double x : c.pre.values()) m = std::min(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("forward produces unit-norm global and part embeddings") {
  std::mt19937_64 rng(3);
  const EncoderParams params = init_encoder(8, 32, 16, 0.5, rng);
  const Matrix img = random_image(16, 8, rng);
  for (int p : {1, 2, 4, 8, 16}) {
    const auto out = forward(params, img, p, true, rng);
    CHECK(std::abs(norm(out.global) - 1.0) < 1e-9);
    CHECK(out.parts.rows() == static_cast<std::size_t>(p));
    for (std::size_t i = 0; i < out.parts.rows(); ++i) CHECK(std::abs(norm(out.parts.row(i)) - 1.0) < 1e-9);
  }
}

TEST_CASE("a single stripe is exactly the global embedding") {
  std::mt19937_64 rng(4);
  const EncoderParams params = init_encoder(8, 32, 16, 0.5, rng);
  const Matrix img = random_image(16, 8, rng);
  const auto out = forward(params, img, 1, false, rng);
  for (std::size_t k = 0; k < out.global.size(); ++k) CHECK(out.parts(0, k) == out.global[k]);
}

TEST_CASE("eval mode is a pure function") {
  std::mt19937_64 rng(5);
  const EncoderParams params = init_encoder(8, 32, 16, 0.5, rng);
  const Matrix img = random_image(16, 8, rng);
  std::mt19937_64 r1(1), r2(99);
  const auto a = forward(params, img, 8, false, r1);
  const auto b = forward(params, img, 8, false, r2);
  CHECK(a.global == b.global);
  CHECK(a.parts == b.parts);
}

TEST_CASE("inverted dropout preserves the expected pooled activation") {
  std::mt19937_64 rng(6);
  const EncoderParams params = init_encoder(8, 32, 16, 0.5, rng);
  const Matrix img = random_image(16, 8, rng);
  const auto eval = forward(params, img, 1, false, rng);
  Vector mean(eval.cache.pooled.size(), 0.0);
  const int trials = 20000;
  for (int t = 0; t < trials; ++t) {
    const auto tr = forward(params, img, 1, true, rng);
    for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += tr.cache.pooled[j] / trials;
  }
  for (std::size_t j = 0; j < mean.size(); ++j) CHECK(mean[j] == doctest::Approx(eval.cache.pooled[j]).epsilon(0.03).scale(1.0));
}

TEST_CASE("degenerate all-zero features raise") {
  std::mt19937_64 rng(7);
  EncoderParams params = init_encoder(3, 4, 2, 0.0, rng);
  for (auto t : params.weights.tensors()) std::fill(t.begin(), t.end(), 0.0);
  CHECK_THROWS_AS(forward(params, random_image(4, 3, rng), 1, false, rng), DegenerateFeatureError);
}

TEST_CASE("stripe count must divide the image height") {
  std::mt19937_64 rng(8);
  const EncoderParams params = init_encoder(3, 4, 2, 0.0, rng);
  CHECK_THROWS_AS(forward(params, random_image(6, 3, rng), 4, false, rng), ConfigError);
  CHECK_THROWS_AS(forward(params, random_image(6, 2, rng), 1, false, rng), DataError);
}

TEST_CASE("backward: zero and radial upstream gradients vanish") {
  std::mt19937_64 rng(9);
  const EncoderParams params = small_encoder(rng);
  const auto out = forward(params, random_image(4, 3, rng), 1, false, rng);

  const ParamSet zero = backward(params, out.cache, Vector(2, 0.0));
  for (auto t : zero.tensors()) {
    for (double x : t) CHECK(x == 0.0);
  }
  Vector radial = out.global;
  for (double& x : radial) x *= 3.7;
  const ParamSet r = backward(params, out.cache, radial);
  for (auto t : r.tensors()) {
    for (double x : t) CHECK(std::abs(x) < 1e-10);
  }
  CHECK_THROWS_AS(backward(params, out.cache, Vector(3, 0.0)), DataError);
}

TEST_CASE("backward matches central finite differences of the composed loss") {
  // m=3, h=4, d=2 networks over random seeds; dropout active with a fixed mask.
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(1000 + seed);
    EncoderParams params = small_encoder(rng, seed % 2 == 0 ? 0.0 : 0.5);
    const Matrix img = random_image(4, 3, rng);
    Matrix table_rows(6, 2);
    for (std::size_t j = 0; j < 6; ++j) {
      const Vector u = oracle::random_unit(2, rng);
      std::copy(u.begin(), u.end(), table_rows.row(j).begin());
    }
    const LookupTable table = LookupTable::from_features(table_rows, 0.1, 0.5);
    const std::vector<std::size_t> reliable{1, 4};
    const TargetDistribution target = build_target(0, reliable, 0.6, 6);

    const std::uint64_t mask_seed = 77 + seed;
    auto loss = [&] {
      std::mt19937_64 mask_rng(mask_seed);
      const auto out = forward(params, img, 1, true, mask_rng);
      return soft_cross_entropy(table.class_probabilities(out.global), target);
    };
    std::mt19937_64 mask_rng(mask_seed);
    const auto out = forward(params, img, 1, true, mask_rng);
    if (min_abs_preactivation(out.cache) < 1e-4) continue;  // too close to a rectifier kink
    const ParamSet grads = backward(params, out.cache, loss_grad_embedding(table, out.global, target));

    auto weights = params.weights.tensors();
    const auto analytic = grads.tensors();
    for (std::size_t t = 0; t < weights.size(); ++t) {
      for (std::size_t i = 0; i < weights[t].size(); ++i) {
        const double numeric = oracle::central_difference(loss, weights[t][i], 1e-5);
        CHECK(oracle::close_relative(analytic[t][i], numeric, 1e-4));
      }
    }
  }
}

TEST_CASE("sgd_step follows the heavy-ball rule") {
  std::mt19937_64 rng(10);
  const EncoderParams start = small_encoder(rng);
  ParamSet g = ParamSet::zeros(3, 4, 2);
  std::normal_distribution<double> n(0.0, 1.0);
  for (auto t : g.tensors()) {
    for (double& x : t) x = n(rng);
  }

  SUBCASE("momentum 0 is plain gradient descent") {
    EncoderParams p = start;
    sgd_step(p, g, 0.1, 0.0);
    const auto before = start.weights.tensors();
    const auto after = p.weights.tensors();
    const auto gt = std::as_const(g).tensors();
    for (std::size_t t = 0; t < 4; ++t) {
      for (std::size_t i = 0; i < after[t].size(); ++i) CHECK(after[t][i] == before[t][i] - 0.1 * gt[t][i]);
    }
  }
  SUBCASE("zero gradient with zero velocity leaves parameters unchanged") {
    EncoderParams p = start;
    sgd_step(p, ParamSet::zeros(3, 4, 2), 0.1, 0.9);
    CHECK(p.weights == start.weights);
  }
  SUBCASE("two steps with constant gradient move by lr * (g + 1.9 g)") {
    EncoderParams p = start;
    sgd_step(p, g, 0.05, 0.9);
    sgd_step(p, g, 0.05, 0.9);
    const auto before = start.weights.tensors();
    const auto after = p.weights.tensors();
    const auto gt = std::as_const(g).tensors();
    for (std::size_t t = 0; t < 4; ++t) {
      for (std::size_t i = 0; i < after[t].size(); ++i) {
        CHECK(after[t][i] - before[t][i] == doctest::Approx(-0.05 * 2.9 * gt[t][i]).epsilon(1e-12));
      }
    }
  }
  SUBCASE("non-finite gradients are rejected before any update") {
    EncoderParams p = start;
    g.b2[0] = std::nan("");
    CHECK_THROWS_AS(sgd_step(p, g, 0.1, 0.9), NumericError);
    CHECK(p == start);
  }
}
