#include "breps/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "breps/error.hpp"
#include "breps/parallel.hpp"

namespace breps {
namespace {

template <typename T>
double cosine_impl(std::span<const T> a, std::span<const T> b) {
  if (a.size() != b.size()) {
    throw Error(Errc::DimensionMismatch, "cosine of dim " + std::to_string(a.size()) + " and " +
                                             std::to_string(b.size()));
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i], y = b[i];
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  if (na == 0.0 || nb == 0.0) throw Error(Errc::ZeroVector, "cosine of an all-zero vector");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

void check_temperature(double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw Error(Errc::InvalidArgument, "temperature must be positive and finite");
  }
}

void check_weights(const std::vector<double>& weights, bool descending) {
  if (weights.empty()) throw Error(Errc::InvalidConfig, "weight vector must have k >= 1");
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) {
      throw Error(Errc::InvalidConfig, "weights[" + std::to_string(i) + "] must be finite and >= 0");
    }
    if (descending && i > 0 && weights[i] > weights[i - 1]) {
      throw Error(Errc::InvalidConfig, "descending weights require weights[" + std::to_string(i - 1) +
                                           "] >= weights[" + std::to_string(i) + "]");
    }
  }
}

}  // namespace

WeightVector::WeightVector(std::vector<double> weights, WeightMode mode)
    : weights_(std::move(weights)), mode_(mode) {
  check_weights(weights_, mode_ == WeightMode::Descending || mode_ == WeightMode::Average);
}

WeightVector WeightVector::descending_default() {
  return WeightVector({0.5, 0.3, 0.2}, WeightMode::Descending);
}

WeightVector WeightVector::average(std::size_t k) {
  if (k == 0) throw Error(Errc::InvalidConfig, "weight vector must have k >= 1");
  return WeightVector(std::vector<double>(k, 1.0 / static_cast<double>(k)), WeightMode::Average);
}

WeightVector WeightVector::descending(std::vector<double> weights) {
  return WeightVector(std::move(weights), WeightMode::Descending);
}

WeightVector WeightVector::custom(std::vector<double> weights) {
  return WeightVector(std::move(weights), WeightMode::Custom);
}

WeightVector WeightVector::learned(std::vector<double> weights) {
  return WeightVector(std::move(weights), WeightMode::Learned);
}

double cosine(std::span<const float> a, std::span<const float> b) { return cosine_impl(a, b); }
double cosine(std::span<const double> a, std::span<const double> b) { return cosine_impl(a, b); }

double block_score(const Representation& query, const Representation& block, double temperature) {
  check_temperature(temperature);
  return cosine(std::span<const float>(query.values), std::span<const float>(block.values)) /
         temperature;
}

std::vector<std::size_t> top_k_indices(std::span<const double> block_scores, std::size_t k) {
  std::vector<std::size_t> order(block_scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t take = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (block_scores[a] != block_scores[b]) return block_scores[a] > block_scores[b];
                      return a < b;
                    });
  order.resize(take);
  return order;
}

double aggregate(std::span<const double> block_scores, const WeightVector& weights) {
  if (block_scores.empty()) throw Error(Errc::EmptyScores, "aggregate needs at least one block score");
  const auto top = top_k_indices(block_scores, weights.k());
  double total = 0.0;
  for (std::size_t i = 0; i < top.size(); ++i) total += weights[i] * block_scores[top[i]];
  return total;
}

ScoredDocument score_document(const Representation& query, const StoredDocument& document,
                              const ScoringOptions& options) {
  check_temperature(options.temperature);
  std::size_t n = document.block_vectors.size();
  if (options.block_limit) n = std::min(n, *options.block_limit);
  if (n == 0) throw Error(Errc::NoBlocks, "document '" + document.doc_id + "' has no blocks to score");

  std::vector<double> scores(n);
  if (options.head != nullptr) {
    const auto q = options.head->project(std::span<const float>(query.values));
    for (std::size_t j = 0; j < n; ++j) {
      const auto b = options.head->project(std::span<const float>(document.block_vectors[j].values));
      scores[j] = cosine(std::span<const double>(q), std::span<const double>(b)) / options.temperature;
    }
  } else {
    for (std::size_t j = 0; j < n; ++j) {
      scores[j] = block_score(query, document.block_vectors[j], options.temperature);
    }
  }

  ScoredDocument out;
  out.doc_id = document.doc_id;
  out.top_block_indices = top_k_indices(scores, options.weights.k());
  out.score = 0.0;
  for (std::size_t i = 0; i < out.top_block_indices.size(); ++i) {
    const double s = scores[out.top_block_indices[i]];
    out.block_scores.push_back(s);
    out.score += options.weights[i] * s;
  }
  return out;
}

std::vector<RerankEntry> rerank(const Representation& query,
                                std::span<const std::string> candidates, const Store& store,
                                const RerankOptions& options) {
  std::vector<std::string> unique;
  {
    std::unordered_map<std::string, bool> seen;
    for (const std::string& id : candidates) {
      if (seen.emplace(id, true).second) unique.push_back(id);
    }
  }

  std::vector<RerankEntry> entries(unique.size());
  parallel_for(unique.size(), options.parallelism, [&](std::size_t i) {
    RerankEntry& entry = entries[i];
    entry.scored.doc_id = unique[i];
    const auto doc = store.get(unique[i]);
    if (!doc) {
      entry.status = RerankStatus::Missing;
      return;
    }
    const std::size_t available = options.scoring.block_limit
                                      ? std::min(doc->block_vectors.size(), *options.scoring.block_limit)
                                      : doc->block_vectors.size();
    if (available == 0) {
      entry.status = RerankStatus::NoBlocks;
      return;
    }
    entry.scored = score_document(query, *doc, options.scoring);
  });

  // Stable partition keeps missing candidates in input order.
  auto missing = std::stable_partition(entries.begin(), entries.end(), [](const RerankEntry& e) {
    return e.status != RerankStatus::Missing;
  });
  std::sort(entries.begin(), missing, [](const RerankEntry& a, const RerankEntry& b) {
    const bool a_scored = a.status == RerankStatus::Scored;
    const bool b_scored = b.status == RerankStatus::Scored;
    if (a_scored != b_scored) return a_scored;
    if (a_scored && a.scored.score != b.scored.score) return a.scored.score > b.scored.score;
    return a.scored.doc_id < b.scored.doc_id;
  });
  return entries;
}

std::vector<RerankEntry> rerank(std::string_view query, std::span<const std::string> candidates,
                                const Store& store, const Embedder& embedder,
                                const RerankOptions& options) {
  if (candidates.empty()) return {};
  if (embedder.dim() != store.dim()) {
    throw Error(Errc::DimensionMismatch, "embedder dim " + std::to_string(embedder.dim()) +
                                             " != store dim " + std::to_string(store.dim()));
  }
  return rerank(embedder.embed_one(query, EmbedderKind::Query), candidates, store, options);
}

}  // namespace breps
