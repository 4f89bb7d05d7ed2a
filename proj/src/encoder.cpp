#include "softsim/encoder.hpp"

#include <cmath>

#include <fmt/format.h>

#include "softsim/errors.hpp"

namespace softsim {

ParamSet ParamSet::zeros(std::size_t channels, std::size_t hidden, std::size_t embed) {
  return {Matrix(channels, hidden), Vector(hidden, 0.0), Matrix(hidden, embed), Vector(embed, 0.0)};
}

bool ParamSet::same_shape(const ParamSet& o) const {
  return w1.rows() == o.w1.rows() && w1.cols() == o.w1.cols() && b1.size() == o.b1.size() &&
         w2.rows() == o.w2.rows() && w2.cols() == o.w2.cols() && b2.size() == o.b2.size();
}

std::array<std::span<double>, 4> ParamSet::tensors() {
  return {std::span<double>(w1.values()), std::span<double>(b1), std::span<double>(w2.values()),
          std::span<double>(b2)};
}

std::array<std::span<const double>, 4> ParamSet::tensors() const {
  return {std::span<const double>(w1.values()), std::span<const double>(b1),
          std::span<const double>(w2.values()), std::span<const double>(b2)};
}

EncoderParams init_encoder(std::size_t channels, std::size_t hidden, std::size_t embed, double dropout_rate,
                           std::mt19937_64& rng) {
  if (channels == 0 || hidden == 0 || embed == 0) throw ConfigError("encoder dimensions must be >= 1");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw ConfigError(fmt::format("hyperparams.dropout: {} is outside [0, 1)", dropout_rate));
  }
  EncoderParams params;
  params.weights = ParamSet::zeros(channels, hidden, embed);
  params.momentum = ParamSet::zeros(channels, hidden, embed);
  params.dropout_rate = dropout_rate;
  std::normal_distribution<double> first(0.0, std::sqrt(2.0 / static_cast<double>(channels)));
  std::normal_distribution<double> second(0.0, std::sqrt(1.0 / static_cast<double>(hidden)));
  for (double& w : params.weights.w1.values()) w = first(rng);
  for (double& w : params.weights.w2.values()) w = second(rng);
  return params;
}

namespace {

// u = b2 + W2^T pooled
Vector output_layer(const ParamSet& w, std::span<const double> pooled) {
  Vector u(w.b2);
  for (std::size_t j = 0; j < w.hidden(); ++j) {
    const double h = pooled[j];
    const auto row = w.w2.row(j);
    for (std::size_t k = 0; k < u.size(); ++k) u[k] += h * row[k];
  }
  return u;
}

// Mean of rows [begin, end) of the masked hidden activations.
Vector pool_rows(const Matrix& pre, const Matrix& mask, std::size_t begin, std::size_t end) {
  Vector pooled(pre.cols(), 0.0);
  for (std::size_t r = begin; r < end; ++r) {
    for (std::size_t j = 0; j < pre.cols(); ++j) {
      const double a = pre(r, j) > 0.0 ? pre(r, j) : 0.0;
      pooled[j] += a * mask(r, j);
    }
  }
  const double count = static_cast<double>(end - begin);
  for (double& x : pooled) x /= count;
  return pooled;
}

}  // namespace

ForwardResult forward(const EncoderParams& params, const Matrix& pixels, int parts, bool train_mode,
                      std::mt19937_64& rng) {
  const ParamSet& w = params.weights;
  const std::size_t rows = pixels.rows();
  if (pixels.cols() != w.channels()) {
    throw DataError(fmt::format("encoder expects {} channels, image has {}", w.channels(), pixels.cols()));
  }
  if (parts < 1) throw ConfigError(fmt::format("hyperparams.p: {} must be >= 1", parts));
  if (rows == 0 || rows % static_cast<std::size_t>(parts) != 0) {
    throw ConfigError(fmt::format("hyperparams.p: image height {} is not divisible by {} stripes", rows, parts));
  }

  ForwardResult out;
  ForwardCache& cache = out.cache;
  cache.input = pixels;
  cache.pre = Matrix(rows, w.hidden());
  cache.mask = Matrix(rows, w.hidden(), 1.0);

  for (std::size_t r = 0; r < rows; ++r) {
    auto pre = cache.pre.row(r);
    for (std::size_t j = 0; j < pre.size(); ++j) pre[j] = w.b1[j];
    for (std::size_t c = 0; c < w.channels(); ++c) {
      const double x = pixels(r, c);
      const auto wrow = w.w1.row(c);
      for (std::size_t j = 0; j < pre.size(); ++j) pre[j] += x * wrow[j];
    }
  }

  if (train_mode && params.dropout_rate > 0.0) {
    std::bernoulli_distribution keep(1.0 - params.dropout_rate);
    const double scale = 1.0 / (1.0 - params.dropout_rate);
    for (double& m : cache.mask.values()) m = keep(rng) ? scale : 0.0;
  }

  cache.pooled = pool_rows(cache.pre, cache.mask, 0, rows);
  cache.u = output_layer(w, cache.pooled);
  cache.u_norm = norm(cache.u);
  cache.v = normalized(cache.u);
  out.global = cache.v;

  out.parts = Matrix(static_cast<std::size_t>(parts), w.embed());
  out.raw_parts = Matrix(static_cast<std::size_t>(parts), w.embed());
  if (parts == 1) {
    std::copy(out.global.begin(), out.global.end(), out.parts.row(0).begin());
    std::copy(cache.u.begin(), cache.u.end(), out.raw_parts.row(0).begin());
    return out;
  }
  const std::size_t stripe = rows / static_cast<std::size_t>(parts);
  for (std::size_t s = 0; s < static_cast<std::size_t>(parts); ++s) {
    const Vector raw = output_layer(w, pool_rows(cache.pre, cache.mask, s * stripe, (s + 1) * stripe));
    const Vector part = normalized(raw);
    std::copy(raw.begin(), raw.end(), out.raw_parts.row(s).begin());
    std::copy(part.begin(), part.end(), out.parts.row(s).begin());
  }
  return out;
}

ParamSet backward(const EncoderParams& params, const ForwardCache& cache, std::span<const double> grad_v) {
  const ParamSet& w = params.weights;
  if (grad_v.size() != w.embed() || cache.v.size() != w.embed() || cache.pre.cols() != w.hidden() ||
      cache.input.cols() != w.channels()) {
    throw DataError("backward: cache or gradient shape does not match encoder parameters");
  }
  ParamSet grads = ParamSet::zeros(w.channels(), w.hidden(), w.embed());

  // Normalization Jacobian: (I - v v^T) / ||u||
  const double radial = dot(cache.v, grad_v);
  Vector grad_u(w.embed());
  for (std::size_t k = 0; k < grad_u.size(); ++k) grad_u[k] = (grad_v[k] - cache.v[k] * radial) / cache.u_norm;

  grads.b2 = grad_u;
  Vector grad_pooled(w.hidden(), 0.0);
  for (std::size_t j = 0; j < w.hidden(); ++j) {
    auto grow = grads.w2.row(j);
    const auto wrow = w.w2.row(j);
    double acc = 0.0;
    for (std::size_t k = 0; k < grad_u.size(); ++k) {
      grow[k] = cache.pooled[j] * grad_u[k];
      acc += wrow[k] * grad_u[k];
    }
    grad_pooled[j] = acc;
  }

  const std::size_t rows = cache.pre.rows();
  const double inv_rows = 1.0 / static_cast<double>(rows);
  Vector grad_pre(w.hidden());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < w.hidden(); ++j) {
      // rectifier subgradient at 0 is 0
      grad_pre[j] = cache.pre(r, j) > 0.0 ? grad_pooled[j] * inv_rows * cache.mask(r, j) : 0.0;
      grads.b1[j] += grad_pre[j];
    }
    for (std::size_t c = 0; c < w.channels(); ++c) {
      const double x = cache.input(r, c);
      auto grow = grads.w1.row(c);
      for (std::size_t j = 0; j < w.hidden(); ++j) grow[j] += x * grad_pre[j];
    }
  }
  return grads;
}

void sgd_step(EncoderParams& params, const ParamSet& grads, double lr, double momentum) {
  if (!(lr > 0.0)) throw ConfigError(fmt::format("learning rate {} must be > 0", lr));
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError(fmt::format("momentum {} is outside [0, 1)", momentum));
  if (!grads.same_shape(params.weights) || !params.momentum.same_shape(params.weights)) {
    throw DataError("sgd_step: gradient shape does not match parameters");
  }
  for (const auto& t : grads.tensors()) {
    if (!all_finite(t)) throw NumericError("sgd_step: non-finite gradient");
  }
  auto weights = params.weights.tensors();
  auto velocity = params.momentum.tensors();
  const auto g = grads.tensors();
  for (std::size_t t = 0; t < weights.size(); ++t) {
    for (std::size_t i = 0; i < weights[t].size(); ++i) {
      velocity[t][i] = momentum * velocity[t][i] + g[t][i];
      weights[t][i] -= lr * velocity[t][i];
    }
  }
}

}  // namespace softsim
