#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "breps/embedding.hpp"
#include "breps/representation_store.hpp"
#include "breps/segmentation.hpp"

namespace breps {

struct CorpusRecord {
  std::string doc_id;
  std::string text;
  std::optional<std::string> title;

  /// Title and text joined by one space when a title is present.
  std::string full_text() const;
};

/// Streams a JSON-lines corpus ({"doc_id", "text", "title"?}) one record at a
/// time. Blank lines are skipped; anything else malformed throws MalformedLine
/// with its line number.
class CorpusReader {
 public:
  explicit CorpusReader(const std::filesystem::path& path);

  std::optional<CorpusRecord> next();
  std::size_t line_number() const noexcept { return line_; }

 private:
  std::ifstream in_;
  std::size_t line_ = 0;
};

std::vector<CorpusRecord> load_corpus(const std::filesystem::path& path);

struct QueryRecord {
  std::string query_id;
  std::string text;
};

/// JSON-lines {"query_id", "text"}, file order.
std::vector<QueryRecord> load_queries(const std::filesystem::path& path);

struct TripletRecord {
  std::string query_id;
  std::string positive_doc_id;
  std::string negative_doc_id;
};

/// TSV "query_id<TAB>positive_doc_id<TAB>negative_doc_id".
std::vector<TripletRecord> load_triplets(const std::filesystem::path& path);

struct IndexOptions {
  SegmentationConfig segmentation;
  std::size_t parallelism = 1;
  std::optional<std::uint64_t> created_unix_seconds;
};

struct IndexStats {
  StoreSummary summary;
  std::uint64_t block_tokens = 0;
  std::uint64_t modeled_block_cost = 0;   // sum of per-block quadratic cost
  std::uint64_t modeled_whole_cost = 0;   // cost of one pass over the kept tokens
  // Segment and embed times are summed over workers; write time is wall time.
  double segment_seconds = 0.0;
  double embed_seconds = 0.0;
  double write_seconds = 0.0;
  double wall_seconds = 0.0;
};

/// Segments, truncates to `segmentation.max_blocks`, embeds and stores every
/// document. Documents are processed in parallel but written in input order,
/// so the payload never depends on scheduling. Any failure aborts the build
/// and leaves no store behind.
IndexStats build_index(CorpusReader& corpus, const Embedder& embedder,
                       const std::filesystem::path& store_path, const IndexOptions& options);

IndexStats build_index(std::span<const CorpusRecord> corpus, const Embedder& embedder,
                       const std::filesystem::path& store_path, const IndexOptions& options);

}  // namespace breps
