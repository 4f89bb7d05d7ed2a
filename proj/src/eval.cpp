#include "softsim/eval.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

#include "softsim/errors.hpp"
#include "softsim/kernels.hpp"

namespace softsim {

namespace {

std::vector<RankedItem> sort_row(std::span<const double> distances) {
  std::vector<RankedItem> ranked(distances.size());
  for (std::size_t j = 0; j < distances.size(); ++j) ranked[j] = {j, distances[j]};
  std::sort(ranked.begin(), ranked.end(), [](const RankedItem& a, const RankedItem& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
  });
  return ranked;
}

}  // namespace

double RankingResult::cmc(std::size_t n) const {
  if (per_query.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& q : per_query) {
    if (q.first_match >= 0 && static_cast<std::size_t>(q.first_match) < n) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(per_query.size());
}

std::vector<RankedItem> rank_gallery(std::span<const double> query, std::span<const Vector> gallery) {
  if (gallery.empty()) throw DataError("rank_gallery: empty gallery");
  Vector distances(gallery.size());
  for (std::size_t j = 0; j < gallery.size(); ++j) {
    if (gallery[j].size() != query.size()) throw DataError("rank_gallery: dimension mismatch");
    distances[j] = euclidean(query, gallery[j]);
  }
  return sort_row(distances);
}

RankingResult compute_metrics(std::vector<std::vector<RankedItem>> rankings, std::span<const ItemMeta> query,
                              std::span<const ItemMeta> gallery) {
  if (rankings.size() != query.size()) throw DataError("compute_metrics: one ranking per query required");
  RankingResult result;
  result.per_query.resize(query.size());
  for (std::size_t q = 0; q < query.size(); ++q) {
    QueryResult& qr = result.per_query[q];
    qr.query = q;
    long position = 0;
    double precision_sum = 0.0;
    for (const RankedItem& item : rankings[q]) {
      if (item.index >= gallery.size()) throw DataError("compute_metrics: gallery index out of range");
      const ItemMeta& g = gallery[item.index];
      const bool same_identity = g.identity == query[q].identity;
      if (same_identity && g.camera == query[q].camera) continue;  // junk
      if (same_identity) {
        ++qr.num_matches;
        if (qr.first_match < 0) qr.first_match = position;
        precision_sum += static_cast<double>(qr.num_matches) / static_cast<double>(position + 1);
      }
      ++position;
    }
    if (qr.num_matches == 0) {
      throw DataError(fmt::format("query {} (identity {}, camera {}) has no cross-camera match in the gallery", q,
                                  query[q].identity, query[q].camera));
    }
    qr.average_precision = precision_sum / static_cast<double>(qr.num_matches);
  }
  result.rankings = std::move(rankings);
  result.rank1 = result.cmc(1);
  result.rank5 = result.cmc(5);
  result.rank10 = result.cmc(10);
  double ap_sum = 0.0;
  for (const auto& qr : result.per_query) ap_sum += qr.average_precision;
  result.map = query.empty() ? 0.0 : ap_sum / static_cast<double>(query.size());
  return result;
}

RankingResult evaluate(std::span<const Vector> query, std::span<const ItemMeta> query_meta,
                       std::span<const Vector> gallery, std::span<const ItemMeta> gallery_meta) {
  if (query.size() != query_meta.size() || gallery.size() != gallery_meta.size()) {
    throw DataError("evaluate: embedding and metadata counts differ");
  }
  if (gallery.empty()) throw DataError("evaluate: empty gallery");
  const Matrix distances = kernels::cross_distance(query, gallery);
  std::vector<std::vector<RankedItem>> rankings(query.size());
#pragma omp parallel for schedule(static)
  for (std::size_t q = 0; q < query.size(); ++q) rankings[q] = sort_row(distances.row(q));
  return compute_metrics(std::move(rankings), query_meta, gallery_meta);
}

Vector tracklet_feature(std::span<const Vector> frames) {
  if (frames.empty()) throw DataError("tracklet_feature: empty tracklet");
  Vector mean(frames.front().size(), 0.0);
  for (const Vector& f : frames) {
    if (f.size() != mean.size()) throw DataError("tracklet_feature: frame dimension mismatch");
    for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += f[k];
  }
  for (double& x : mean) x /= static_cast<double>(frames.size());
  return normalized(mean);
}

}  // namespace softsim
