#pragma once

#include <span>
#include <vector>

#include "softsim/linalg.hpp"

namespace softsim {

struct ItemMeta {
  int identity = -1;
  int camera = -1;
};

struct RankedItem {
  std::size_t index = 0;
  double distance = 0.0;

  bool operator==(const RankedItem&) const = default;
};

struct QueryResult {
  std::size_t query = 0;
  long first_match = -1;  // 0-based position among non-junk entries
  double average_precision = 0.0;
  std::size_t num_matches = 0;
};

struct RankingResult {
  std::vector<std::vector<RankedItem>> rankings;
  std::vector<QueryResult> per_query;
  double rank1 = 0.0;
  double rank5 = 0.0;
  double rank10 = 0.0;
  double map = 0.0;

  /// Fraction of queries whose first valid match lies within the top n.
  double cmc(std::size_t n) const;
};

/// Gallery indices by ascending Euclidean distance, ties by index.
std::vector<RankedItem> rank_gallery(std::span<const double> query, std::span<const Vector> gallery);

/// CMC and mAP under the usual re-identification protocol: gallery entries that
/// share both identity and camera with the query are junk and skipped.
/// Throws DataError if a query has no valid match.
RankingResult compute_metrics(std::vector<std::vector<RankedItem>> rankings, std::span<const ItemMeta> query,
                              std::span<const ItemMeta> gallery);

/// Ranks every query (in parallel) and scores the result.
RankingResult evaluate(std::span<const Vector> query, std::span<const ItemMeta> query_meta,
                       std::span<const Vector> gallery, std::span<const ItemMeta> gallery_meta);

/// Renormalized mean of the frame embeddings.
Vector tracklet_feature(std::span<const Vector> frames);

}  // namespace softsim
