#include "softsim/kernels.hpp"

#include <algorithm>

namespace softsim::kernels {

namespace {
constexpr std::size_t kTile = 32;
}

Matrix pairwise_dissimilarity_serial(std::span<const ImageFeatures> features, const DissimilarityConfig& cfg) {
  const std::size_t n = features.size();
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out(i, j) = overall_dissimilarity(features[i], features[j], cfg);
  }
  return out;
}

Matrix pairwise_dissimilarity(std::span<const ImageFeatures> features, const DissimilarityConfig& cfg) {
  const std::size_t n = features.size();
  Matrix out(n, n);
  const std::size_t tiles = (n + kTile - 1) / kTile;
  // Upper-triangular tiles only; D is exactly symmetric so the mirror is free.
#pragma omp parallel for schedule(dynamic)
  for (std::size_t t = 0; t < tiles * tiles; ++t) {
    const std::size_t ti = t / tiles;
    const std::size_t tj = t % tiles;
    if (tj < ti) continue;
    const std::size_t i_end = std::min(n, (ti + 1) * kTile);
    const std::size_t j_end = std::min(n, (tj + 1) * kTile);
    for (std::size_t i = ti * kTile; i < i_end; ++i) {
      for (std::size_t j = std::max(i, tj * kTile); j < j_end; ++j) {
        const double d = overall_dissimilarity(features[i], features[j], cfg);
        out(i, j) = d;
        out(j, i) = d;
      }
    }
  }
  return out;
}

Matrix cross_distance_serial(std::span<const Vector> a, std::span<const Vector> b) {
  Matrix out(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) out(i, j) = euclidean(a[i], b[j]);
  }
  return out;
}

Matrix cross_distance(std::span<const Vector> a, std::span<const Vector> b) {
  Matrix out(a.size(), b.size());
  const std::size_t row_tiles = (a.size() + kTile - 1) / kTile;
  const std::size_t col_tiles = (b.size() + kTile - 1) / kTile;
#pragma omp parallel for schedule(static)
  for (std::size_t t = 0; t < row_tiles * col_tiles; ++t) {
    const std::size_t ti = t / col_tiles;
    const std::size_t tj = t % col_tiles;
    const std::size_t i_end = std::min(a.size(), (ti + 1) * kTile);
    const std::size_t j_end = std::min(b.size(), (tj + 1) * kTile);
    for (std::size_t i = ti * kTile; i < i_end; ++i) {
      for (std::size_t j = tj * kTile; j < j_end; ++j) out(i, j) = euclidean(a[i], b[j]);
    }
  }
  return out;
}

}  // namespace softsim::kernels
