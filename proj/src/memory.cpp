#include "softsim/memory.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "softsim/errors.hpp"

namespace softsim {

namespace {
constexpr double kUnitTolerance = 1e-9;
}

LookupTable LookupTable::from_features(const Matrix& embeddings, double tau, double momentum) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError(fmt::format("hyperparams.tau: {} must be > 0", tau));
  if (!(momentum >= 0.0 && momentum <= 1.0)) {
    throw ConfigError(fmt::format("hyperparams.memory_momentum: {} is outside [0, 1]", momentum));
  }
  for (std::size_t i = 0; i < embeddings.rows(); ++i) {
    if (std::abs(norm(embeddings.row(i)) - 1.0) > kUnitTolerance) {
      throw DataError(fmt::format("lookup table row {} is not unit norm", i));
    }
  }
  LookupTable table;
  table.features_ = embeddings;
  table.tau_ = tau;
  table.momentum_ = momentum;
  return table;
}

Vector LookupTable::class_probabilities(std::span<const double> v) const {
  if (v.size() != dim()) throw DataError("class_probabilities: embedding dimension mismatch");
  Vector probs(size());
  for (std::size_t j = 0; j < size(); ++j) probs[j] = dot(features_.row(j), v) / tau_;
  const double max_logit = *std::max_element(probs.begin(), probs.end());
  double total = 0.0;
  for (double& p : probs) {
    p = std::exp(p - max_logit);
    total += p;
  }
  for (double& p : probs) p /= total;
  return probs;
}

void LookupTable::update_entry(std::size_t i, std::span<const double> v) {
  if (i >= size()) throw DataError(fmt::format("update_entry: class {} out of range [0, {})", i, size()));
  if (v.size() != dim()) throw DataError("update_entry: embedding dimension mismatch");
  auto row = features_.row(i);
  // The endpoints are exact: a frozen table, or plain replacement.
  if (momentum_ == 1.0) return;
  if (momentum_ == 0.0) {
    std::copy(v.begin(), v.end(), row.begin());
    return;
  }
  Vector mixed(dim());
  for (std::size_t k = 0; k < dim(); ++k) mixed[k] = momentum_ * row[k] + (1.0 - momentum_) * v[k];
  const Vector unit = normalized(mixed);
  std::copy(unit.begin(), unit.end(), row.begin());
}

}  // namespace softsim
