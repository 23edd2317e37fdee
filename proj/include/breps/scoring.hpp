#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "breps/embedding.hpp"
#include "breps/projection_head.hpp"
#include "breps/representation_store.hpp"

namespace breps {

inline constexpr double kDefaultTemperature = 0.01;

enum class WeightMode { Descending, Average, Custom, Learned };

/// Aggregation weights for the top-k block scores. Descending mode enforces
/// w_1 >= w_2 >= ... >= w_k; every mode requires nonnegative finite weights.
class WeightVector {
 public:
  /// [0.5, 0.3, 0.2]
  static WeightVector descending_default();
  static WeightVector average(std::size_t k = 3);
  static WeightVector descending(std::vector<double> weights);
  /// Nonnegative weights with no ordering constraint.
  static WeightVector custom(std::vector<double> weights);
  static WeightVector learned(std::vector<double> weights);

  std::size_t k() const noexcept { return weights_.size(); }
  std::span<const double> values() const noexcept { return weights_; }
  double operator[](std::size_t i) const { return weights_[i]; }
  WeightMode mode() const noexcept { return mode_; }

 private:
  WeightVector(std::vector<double> weights, WeightMode mode);

  std::vector<double> weights_;
  WeightMode mode_;
};

double cosine(std::span<const float> a, std::span<const float> b);
double cosine(std::span<const double> a, std::span<const double> b);

/// cos(query, block) / temperature. Throws ZeroVector or DimensionMismatch.
double block_score(const Representation& query, const Representation& block,
                   double temperature = kDefaultTemperature);

/// Weighted sum of the min(k, n) largest scores paired with the first
/// min(k, n) weights, largest score with w_1. Throws EmptyScores.
double aggregate(std::span<const double> block_scores, const WeightVector& weights);

/// Ordinals of the min(k, n) best scores, best first; equal scores keep the
/// lower ordinal first.
std::vector<std::size_t> top_k_indices(std::span<const double> block_scores, std::size_t k);

struct ScoredDocument {
  std::string doc_id;
  double score = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> top_block_indices;
  std::vector<double> block_scores;
};

struct ScoringOptions {
  WeightVector weights = WeightVector::descending_default();
  double temperature = kDefaultTemperature;
  // Only the first n' stored blocks are scored when set.
  std::optional<std::size_t> block_limit;
  // Applied to the query and every block before the cosine when set.
  const ProjectionHead* head = nullptr;
};

/// Scores one stored document against a query vector. Throws NoBlocks when
/// the document has no stored blocks (or block_limit is 0).
ScoredDocument score_document(const Representation& query, const StoredDocument& document,
                              const ScoringOptions& options = {});

enum class RerankStatus { Scored, NoBlocks, Missing };

struct RerankEntry {
  ScoredDocument scored;
  RerankStatus status = RerankStatus::Scored;
};

struct RerankOptions {
  ScoringOptions scoring;
  std::size_t parallelism = 1;
};

/// Reranks `candidates` for a precomputed query vector. Scored documents come
/// first by (score desc, doc_id asc), then zero-block documents by doc_id,
/// then candidates missing from the store in input order. Duplicate
/// candidate ids are scored once.
std::vector<RerankEntry> rerank(const Representation& query,
                                std::span<const std::string> candidates, const Store& store,
                                const RerankOptions& options = {});

/// Embeds the query once, then reranks.
std::vector<RerankEntry> rerank(std::string_view query, std::span<const std::string> candidates,
                                const Store& store, const Embedder& embedder,
                                const RerankOptions& options = {});

}  // namespace breps
