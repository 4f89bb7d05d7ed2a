#include "softsim/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "softsim/errors.hpp"
#include "softsim/kernels.hpp"

namespace softsim {

void validate(const DissimilarityConfig& cfg) {
  if (!(cfg.lambda_p >= 0.0 && cfg.lambda_p <= 1.0)) {
    throw ConfigError(fmt::format("hyperparams.lambda_p: {} is outside [0, 1]", cfg.lambda_p));
  }
  if (!(cfg.lambda_c >= 0.0) || !std::isfinite(cfg.lambda_c)) {
    throw ConfigError(fmt::format("hyperparams.lambda_c: {} must be finite and >= 0", cfg.lambda_c));
  }
  if (cfg.k < 0) throw ConfigError(fmt::format("hyperparams.k: {} must be >= 0", cfg.k));
  if (cfg.p < 1) throw ConfigError(fmt::format("hyperparams.p: {} must be >= 1", cfg.p));
}

double global_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DataError("global_distance: dimension mismatch");
  return euclidean(a, b);
}

double part_distance(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() == 0) {
    throw DataError(fmt::format("part_distance: part count mismatch ({} vs {})", a.rows(), b.rows()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) sum += euclidean(a.row(i), b.row(i));
  return sum / static_cast<double>(a.rows());
}

double cce(int camera_a, int camera_b, double lambda_c) { return camera_a == camera_b ? lambda_c : 0.0; }

double overall_dissimilarity(const ImageFeatures& a, const ImageFeatures& b, const DissimilarityConfig& cfg) {
  const double d = global_distance(a.global, b.global);
  const double d_part = part_distance(a.parts, b.parts);
  return (1.0 - cfg.lambda_p) * d + cfg.lambda_p * d_part + cce(a.camera, b.camera, cfg.lambda_c);
}

std::vector<std::size_t> ReliableSet::indices() const {
  std::vector<std::size_t> out;
  out.reserve(neighbors.size());
  for (const auto& n : neighbors) out.push_back(n.index);
  return out;
}

ReliableSet select_from_row(std::span<const ImageFeatures> features, std::span<const double> row,
                            std::size_t anchor, const DissimilarityConfig& cfg) {
  const std::size_t n = features.size();
  if (anchor >= n || row.size() != n) throw DataError(fmt::format("select_reliable: anchor {} out of range", anchor));
  ReliableSet set;
  set.anchor = anchor;
  const std::size_t want = static_cast<std::size_t>(std::max(cfg.k, 0));
  const std::size_t take = std::min(want, n - 1);
  set.truncated = take < want;
  if (take == 0) return set;

  std::vector<std::size_t> candidates;
  candidates.reserve(n - 1);
  for (std::size_t j = 0; j < n; ++j) {
    if (j != anchor) candidates.push_back(j);
  }
  auto less = [&](std::size_t x, std::size_t y) { return row[x] < row[y] || (row[x] == row[y] && x < y); };
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take), candidates.end(), less);

  const ImageFeatures& a = features[anchor];
  for (std::size_t r = 0; r < take; ++r) {
    const std::size_t j = candidates[r];
    const ImageFeatures& b = features[j];
    set.neighbors.push_back({j, row[j], global_distance(a.global, b.global), part_distance(a.parts, b.parts),
                             cce(a.camera, b.camera, cfg.lambda_c)});
  }
  return set;
}

ReliableSet select_reliable(std::span<const ImageFeatures> features, std::size_t anchor,
                            const DissimilarityConfig& cfg) {
  if (anchor >= features.size()) throw DataError(fmt::format("select_reliable: anchor {} out of range", anchor));
  Vector row(features.size());
  for (std::size_t j = 0; j < features.size(); ++j) {
    row[j] = j == anchor ? 0.0 : overall_dissimilarity(features[anchor], features[j], cfg);
  }
  return select_from_row(features, row, anchor, cfg);
}

std::vector<ReliableSet> select_all_reliable(std::span<const ImageFeatures> features,
                                             const DissimilarityConfig& cfg) {
  validate(cfg);
  std::vector<ReliableSet> sets(features.size());
  if (cfg.k == 0) {
    for (std::size_t i = 0; i < features.size(); ++i) {
      sets[i].anchor = i;
      sets[i].truncated = false;
    }
    return sets;
  }
  const Matrix dissim = kernels::pairwise_dissimilarity(features, cfg);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < features.size(); ++i) sets[i] = select_from_row(features, dissim.row(i), i, cfg);
  return sets;
}

double cross_camera_fraction(std::span<const ImageFeatures> features, std::span<const ReliableSet> sets) {
  std::size_t total = 0;
  std::size_t cross = 0;
  for (const auto& set : sets) {
    for (const auto& n : set.neighbors) {
      ++total;
      if (features[n.index].camera != features[set.anchor].camera) ++cross;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(cross) / static_cast<double>(total);
}

}  // namespace softsim
