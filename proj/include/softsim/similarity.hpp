#pragma once

#include <span>
#include <vector>

#include "softsim/linalg.hpp"

namespace softsim {

/// Everything the dissimilarity needs to know about one image.
struct ImageFeatures {
  Vector global;  // unit norm
  Matrix parts;   // p x d, unit-norm rows
  int camera = -1;

  bool operator==(const ImageFeatures&) const = default;
};

struct DissimilarityConfig {
  double lambda_p = 0.5;
  double lambda_c = 0.02;
  int k = 4;
  int p = 8;

  bool operator==(const DissimilarityConfig&) const = default;
};

void validate(const DissimilarityConfig& cfg);

double global_distance(std::span<const double> a, std::span<const double> b);

/// Mean Euclidean distance between corresponding stripes.
double part_distance(const Matrix& a, const Matrix& b);

/// Cross-camera encouragement: penalizes pairs seen by the same camera.
double cce(int camera_a, int camera_b, double lambda_c);

/// (1 - lambda_p) * d + lambda_p * d_part + CCE
double overall_dissimilarity(const ImageFeatures& a, const ImageFeatures& b, const DissimilarityConfig& cfg);

struct Neighbor {
  std::size_t index = 0;
  double dissimilarity = 0.0;
  double global = 0.0;
  double part = 0.0;
  double cce = 0.0;

  bool operator==(const Neighbor&) const = default;
};

struct ReliableSet {
  std::size_t anchor = 0;
  std::vector<Neighbor> neighbors;  // ascending dissimilarity, ties by index
  bool truncated = false;           // fewer than k candidates existed

  std::vector<std::size_t> indices() const;
  bool operator==(const ReliableSet&) const = default;
};

/// The k images with the smallest dissimilarity to `anchor`, excluding itself.
ReliableSet select_reliable(std::span<const ImageFeatures> features, std::size_t anchor,
                            const DissimilarityConfig& cfg);

/// Reliable sets for every anchor from one pairwise dissimilarity matrix.
std::vector<ReliableSet> select_all_reliable(std::span<const ImageFeatures> features,
                                             const DissimilarityConfig& cfg);

/// Selection from a precomputed row of dissimilarities (entry `anchor` ignored).
ReliableSet select_from_row(std::span<const ImageFeatures> features, std::span<const double> row,
                            std::size_t anchor, const DissimilarityConfig& cfg);

/// Fraction of selected neighbors captured by a camera other than the anchor's.
double cross_camera_fraction(std::span<const ImageFeatures> features, std::span<const ReliableSet> sets);

}  // namespace softsim
