#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace breps {

enum class EmbedderKind { Passage, Query };

std::string_view kind_name(EmbedderKind kind) noexcept;

/// A dense vector produced by an embedder. Stored as 32-bit floats.
struct Representation {
  std::vector<float> values;

  std::size_t dim() const noexcept { return values.size(); }
  bool operator==(const Representation&) const = default;
};

/// Prompt template applied around block and query text.
struct InputFormat {
  std::string passage_prefix = "passage: ";
  std::string query_prefix = "query: ";
  std::string terminator = "</s>";
  std::size_t max_query_tokens = 32;
};

/// Wraps text in the passage/query template. Query bodies longer than
/// `format.max_query_tokens` engine tokens are cut to that many tokens.
std::string format_input(std::string_view text, EmbedderKind kind,
                         const InputFormat& format = {});

/// Quadratic attention cost model: token_count squared.
std::uint64_t embedding_cost(std::uint64_t token_count) noexcept;

/// Interface every embedder implements. Implementations are read-only after
/// construction and safe to call concurrently.
class Embedder {
 public:
  virtual ~Embedder() = default;

  virtual std::size_t dim() const = 0;

  /// Embeds already formatted inputs, one vector per input in input order.
  virtual std::vector<Representation> embed_formatted(
      std::span<const std::string> formatted, EmbedderKind kind) const = 0;

  const InputFormat& input_format() const noexcept { return format_; }
  void set_input_format(InputFormat format) { format_ = std::move(format); }

  /// Formats then embeds. Passage inputs must have a non-empty body.
  std::vector<Representation> embed(std::span<const std::string> texts,
                                    EmbedderKind kind) const;

  Representation embed_one(std::string_view text, EmbedderKind kind) const;

 private:
  InputFormat format_;
};

/// Deterministic hashing embedder. Every token (including the template prefix
/// and terminator) maps to a seeded pseudo-random vector in [-1, 1]^D; a text
/// embeds to the L2-normalized sum of its token vectors.
class HashingEmbedder : public Embedder {
 public:
  static constexpr std::uint64_t kDefaultSeed = 0x42524550535f5631ULL;

  explicit HashingEmbedder(std::size_t dim = 64, std::uint64_t seed = kDefaultSeed);

  std::size_t dim() const override { return dim_; }

  std::vector<Representation> embed_formatted(
      std::span<const std::string> formatted, EmbedderKind kind) const override;

  /// Token strings fed to the hash for one formatted input.
  std::vector<std::string> input_tokens(std::string_view formatted) const;

  /// The pseudo-random vector assigned to one token string (double precision).
  std::vector<double> token_vector(std::string_view token) const;

  std::uint64_t seed() const noexcept { return seed_; }

 protected:
  std::vector<std::vector<double>> token_vectors(std::string_view formatted) const;

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

/// Hashing embedder with a self-attention style mixing pass whose cost grows
/// with the square of the input length. Used to measure how blockwise encoding
/// amortizes quadratic attention.
class QuadraticCostEmbedder : public HashingEmbedder {
 public:
  using HashingEmbedder::HashingEmbedder;

  std::vector<Representation> embed_formatted(
      std::span<const std::string> formatted, EmbedderKind kind) const override;
};

struct RemoteEmbedderOptions {
  std::string url;  // e.g. http://127.0.0.1:8080
  std::size_t dim = 64;
  std::size_t max_batch = 64;
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{200};
  std::chrono::seconds timeout{60};
};

struct ServiceHealth {
  std::string status;
  std::size_t dim = 0;
};

/// HTTP client for the embedding service (POST /embed, GET /health).
/// Transport failures and 5xx responses are retried with exponential backoff;
/// a 413 response splits the batch in half.
class RemoteEmbedder : public Embedder {
 public:
  explicit RemoteEmbedder(RemoteEmbedderOptions options);

  std::size_t dim() const override { return options_.dim; }

  std::vector<Representation> embed_formatted(
      std::span<const std::string> formatted, EmbedderKind kind) const override;

  ServiceHealth health() const;

  const RemoteEmbedderOptions& options() const noexcept { return options_; }

 private:
  std::vector<Representation> embed_batch(std::span<const std::string> batch,
                                          EmbedderKind kind) const;

  RemoteEmbedderOptions options_;
  std::string scheme_host_port_;
};

}  // namespace breps
