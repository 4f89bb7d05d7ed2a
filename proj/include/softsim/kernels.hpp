#pragma once

#include <span>

#include "softsim/linalg.hpp"
#include "softsim/similarity.hpp"

// Data-parallel kernels. Each has a serial reference kept for tests and the
// benchmark; the OpenMP versions compute every entry with the same scalar
// routine, so both produce bit-identical results.
namespace softsim::kernels {

Matrix pairwise_dissimilarity_serial(std::span<const ImageFeatures> features, const DissimilarityConfig& cfg);
Matrix pairwise_dissimilarity(std::span<const ImageFeatures> features, const DissimilarityConfig& cfg);

/// Euclidean distances between every row pair of `a` and `b`.
Matrix cross_distance_serial(std::span<const Vector> a, std::span<const Vector> b);
Matrix cross_distance(std::span<const Vector> a, std::span<const Vector> b);

}  // namespace softsim::kernels
