#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "breps/embedding.hpp"
#include "breps/scoring.hpp"
#include "breps/segmentation.hpp"
#include "breps/training.hpp"

namespace breps {

enum class EmbedderType { Test, Service };

struct EmbedderSettings {
  EmbedderType type = EmbedderType::Test;
  std::uint64_t seed = HashingEmbedder::kDefaultSeed;
  bool quadratic_cost = false;
  std::string url;
  std::size_t max_batch = 64;
  int attempts = 3;
  std::int64_t backoff_ms = 200;
  std::int64_t timeout_s = 60;
  InputFormat format;
};

struct ScoringSettings {
  std::size_t k = 3;
  // descending | average | custom | learned-file
  std::string weights_mode = "descending";
  std::vector<double> weights;          // used by descending (when given) and custom
  std::filesystem::path weights_file;   // head file carrying learned weights
  std::filesystem::path head_file;      // optional projection head for reranking
  double temperature = kDefaultTemperature;
  std::optional<std::size_t> inference_blocks;
};

struct TrainingSettings {
  std::string loss = "hinge";  // hinge | ranknet
  double margin = 10.0;
  double sigma = 1.0;
  double learning_rate = 5e-5;
  std::size_t steps = 0;
  std::size_t accumulation = 4;
  bool learn_weights = false;
  bool train_projection = true;
  std::uint64_t seed = 0;
  double init_noise = 1e-3;
  std::optional<std::size_t> output_dim;
};

/// Everything the command line tools need. Loaded from a JSON document;
/// unknown keys and ill-typed values are rejected with their key path.
struct EngineConfig {
  std::size_t dim = 64;
  SegmentationConfig segmentation;
  ScoringSettings scoring;
  EmbedderSettings embedder;
  TrainingSettings training;
  std::size_t parallelism = 1;

  static EngineConfig defaults();
  static EngineConfig from_json_text(const std::string& text);
  /// Reads the file, then applies BREPS_EMBED_URL if it is set.
  static EngineConfig load(const std::filesystem::path& path);

  /// Applies an embedding-service URL override: sets embedder.url and switches
  /// to the service embedder unless the type was fixed explicitly.
  void apply_url_override(const std::string& url);

  void validate() const;

  std::unique_ptr<Embedder> make_embedder() const;
  WeightVector make_weights() const;
  LossFunction make_loss() const;
  TrainingConfig make_training_config() const;

  bool embedder_type_explicit = false;
};

}  // namespace breps
