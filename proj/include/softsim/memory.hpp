#pragma once

#include <span>

#include "softsim/linalg.hpp"

namespace softsim {

/// Non-parametric classifier: one stored unit-norm feature per training image,
/// each acting as the weight vector of its own class.
class LookupTable {
 public:
  LookupTable() = default;

  /// Row i becomes embedding i. Throws DataError if a row is not unit norm.
  static LookupTable from_features(const Matrix& embeddings, double tau, double momentum);

  std::size_t size() const { return features_.rows(); }
  std::size_t dim() const { return features_.cols(); }
  double tau() const { return tau_; }
  double momentum() const { return momentum_; }
  const Matrix& features() const { return features_; }
  std::span<const double> row(std::size_t i) const { return features_.row(i); }

  /// Temperature softmax over inner products with every stored feature.
  Vector class_probabilities(std::span<const double> v) const;

  /// V_i <- normalize(mu * V_i + (1 - mu) * v).
  void update_entry(std::size_t i, std::span<const double> v);

  bool operator==(const LookupTable&) const = default;

 private:
  Matrix features_;
  double tau_ = 0.1;
  double momentum_ = 0.5;
};

}  // namespace softsim
