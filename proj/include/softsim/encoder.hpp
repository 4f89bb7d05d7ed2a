#pragma once

#include <array>
#include <random>
#include <span>

#include "softsim/linalg.hpp"

namespace softsim {

/// Weights of the row-wise two-layer perceptron. Also used for gradients and
/// the optimizer's momentum buffers, which share the layout.
struct ParamSet {
  Matrix w1;  // channels x hidden
  Vector b1;  // hidden
  Matrix w2;  // hidden x embed
  Vector b2;  // embed

  static ParamSet zeros(std::size_t channels, std::size_t hidden, std::size_t embed);

  std::size_t channels() const { return w1.rows(); }
  std::size_t hidden() const { return w1.cols(); }
  std::size_t embed() const { return w2.cols(); }
  bool same_shape(const ParamSet& other) const;

  /// The four tensors as flat spans, in declaration order.
  std::array<std::span<double>, 4> tensors();
  std::array<std::span<const double>, 4> tensors() const;

  bool operator==(const ParamSet&) const = default;
};

struct EncoderParams {
  ParamSet weights;
  ParamSet momentum;
  double dropout_rate = 0.5;

  bool operator==(const EncoderParams&) const = default;
};

/// He-style initialization for the first layer, 1/sqrt(fan_in) for the second.
EncoderParams init_encoder(std::size_t channels, std::size_t hidden, std::size_t embed, double dropout_rate,
                           std::mt19937_64& rng);

struct ForwardCache {
  Matrix input;        // H x channels
  Matrix pre;          // H x hidden, before the rectifier
  Matrix mask;         // H x hidden, inverted-dropout scale (1 in eval mode)
  Vector pooled;       // hidden, average over all rows
  Vector u;            // embed, before normalization
  double u_norm = 0.0;
  Vector v;            // normalized global embedding
};

struct ForwardResult {
  Vector global;  // unit norm
  Matrix parts;      // p x embed, unit-norm rows
  Matrix raw_parts;  // p x embed, before normalization
  ForwardCache cache;
};

/// Embeds one image. Rows share the perceptron weights; the global feature is
/// the average over all rows and part i the average over stripe i, each passed
/// through the output layer and normalized. Dropout only runs in train mode.
ForwardResult forward(const EncoderParams& params, const Matrix& pixels, int parts, bool train_mode,
                      std::mt19937_64& rng);

/// Parameter gradients given dL/dv for the normalized global embedding v.
ParamSet backward(const EncoderParams& params, const ForwardCache& cache, std::span<const double> grad_v);

/// Heavy-ball update: m <- momentum * m + g; w <- w - lr * m.
void sgd_step(EncoderParams& params, const ParamSet& grads, double lr, double momentum);

}  // namespace softsim
