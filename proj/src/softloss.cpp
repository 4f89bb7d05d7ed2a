#include "softsim/softloss.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "softsim/errors.hpp"

namespace softsim {

double TargetDistribution::reliable_weight() const {
  return reliable.empty() ? 0.0 : (1.0 - lambda) / static_cast<double>(reliable.size());
}

Vector TargetDistribution::dense() const {
  Vector t(num_classes, 0.0);
  t[anchor] = lambda;
  const double w = reliable_weight();
  for (std::size_t j : reliable) t[j] = w;
  return t;
}

std::size_t TargetDistribution::support() const {
  return 1 + (reliable_weight() > 0.0 ? reliable.size() : 0);
}

TargetDistribution build_target(std::size_t anchor, std::span<const std::size_t> reliable, double lambda,
                                std::size_t num_classes) {
  if (!(lambda > 0.0 && lambda <= 1.0)) {
    throw ConfigError(fmt::format("lambda: {} is outside (0, 1]", lambda));
  }
  if (anchor >= num_classes) throw DataError(fmt::format("target anchor {} out of range [0, {})", anchor, num_classes));
  std::vector<std::size_t> sorted(reliable.begin(), reliable.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i] >= num_classes) throw DataError(fmt::format("reliable class {} out of range [0, {})", sorted[i], num_classes));
    if (sorted[i] == anchor) throw DataError(fmt::format("anchor {} listed among its own reliable classes", anchor));
    if (i > 0 && sorted[i] == sorted[i - 1]) throw DataError(fmt::format("reliable class {} listed twice", sorted[i]));
  }
  TargetDistribution t;
  t.anchor = anchor;
  t.reliable.assign(reliable.begin(), reliable.end());
  t.lambda = reliable.empty() ? 1.0 : lambda;
  t.num_classes = num_classes;
  return t;
}

TargetDistribution one_hot_target(std::size_t anchor, std::size_t num_classes) {
  return build_target(anchor, {}, 1.0, num_classes);
}

double soft_cross_entropy(std::span<const double> probs, const TargetDistribution& target) {
  if (probs.size() != target.num_classes) throw DataError("soft_cross_entropy: class count mismatch");
  auto log_prob = [&](std::size_t j) {
    if (!(probs[j] > 0.0)) throw NumericError(fmt::format("target class {} has zero probability", j));
    return std::log(probs[j]);
  };
  double loss = -target.lambda * log_prob(target.anchor);
  double reliable_sum = 0.0;
  for (std::size_t j : target.reliable) reliable_sum += log_prob(j);
  loss -= target.reliable_weight() * reliable_sum;
  return loss;
}

Vector loss_grad_embedding(const LookupTable& table, std::span<const double> probs,
                           std::span<const double> target_dense) {
  if (probs.size() != table.size() || target_dense.size() != table.size()) {
    throw DataError("loss_grad_embedding: class count mismatch");
  }
  Vector grad(table.dim(), 0.0);
  for (std::size_t j = 0; j < table.size(); ++j) {
    const double coeff = probs[j] - target_dense[j];
    const auto row = table.row(j);
    for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += coeff * row[k];
  }
  for (double& g : grad) g /= table.tau();
  return grad;
}

Vector loss_grad_embedding(const LookupTable& table, std::span<const double> v, const TargetDistribution& target) {
  const Vector probs = table.class_probabilities(v);
  return loss_grad_embedding(table, probs, target.dense());
}

}  // namespace softsim
