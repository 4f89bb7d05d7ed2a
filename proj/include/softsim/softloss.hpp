#pragma once

#include <span>
#include <vector>

#include "softsim/linalg.hpp"
#include "softsim/memory.hpp"

namespace softsim {

/// Softened label: weight lambda on the image's own class and (1 - lambda) / k
/// on each of its k reliable classes.
struct TargetDistribution {
  std::size_t anchor = 0;
  std::vector<std::size_t> reliable;
  double lambda = 1.0;
  std::size_t num_classes = 0;

  double reliable_weight() const;
  Vector dense() const;
  /// Number of classes with nonzero target mass.
  std::size_t support() const;
};

/// k = 0 forces lambda = 1. Throws ConfigError for lambda outside (0, 1] and
/// DataError for duplicate, out-of-range or self-referencing indices.
TargetDistribution build_target(std::size_t anchor, std::span<const std::size_t> reliable, double lambda,
                                std::size_t num_classes);

TargetDistribution one_hot_target(std::size_t anchor, std::size_t num_classes);

/// -lambda log p(anchor) - (1 - lambda) / k * sum log p(reliable_j)
double soft_cross_entropy(std::span<const double> probs, const TargetDistribution& target);

/// (1 / tau) * sum_j (p_j - t_j) V_j: gradient with respect to the normalized
/// embedding, before the normalization Jacobian.
Vector loss_grad_embedding(const LookupTable& table, std::span<const double> v, const TargetDistribution& target);

/// Same as above with probabilities already computed for v.
Vector loss_grad_embedding(const LookupTable& table, std::span<const double> probs,
                           std::span<const double> target_dense);

}  // namespace softsim
