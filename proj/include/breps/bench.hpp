#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>

#include "breps/corpus_io.hpp"
#include "breps/embedding.hpp"
#include "breps/segmentation.hpp"

namespace breps {

struct BenchReport {
  std::size_t documents = 0;
  std::uint64_t blocks = 0;
  std::uint64_t block_tokens = 0;
  std::uint64_t modeled_block_cost = 0;
  std::uint64_t modeled_whole_cost = 0;
  double modeled_ratio = 0.0;  // block cost / whole cost
  double blockwise_seconds = 0.0;  // full index build: segment + embed + write
  double whole_seconds = 0.0;      // one embedding call per document over the same tokens
  double segment_seconds = 0.0;
  double embed_seconds = 0.0;
  double write_seconds = 0.0;
};

/// Compares blockwise indexing against embedding each document's kept tokens
/// in a single pass, both under `embedder`. The scratch store is written to
/// `scratch_store` and removed afterwards.
BenchReport run_bench(std::span<const CorpusRecord> corpus, const SegmentationConfig& segmentation,
                      const Embedder& embedder, const std::filesystem::path& scratch_store);

}  // namespace breps
