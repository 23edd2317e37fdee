#include "breps/bench.hpp"

#include <chrono>

namespace breps {

BenchReport run_bench(std::span<const CorpusRecord> corpus, const SegmentationConfig& segmentation,
                      const Embedder& embedder, const std::filesystem::path& scratch_store) {
  BenchReport report;
  report.documents = corpus.size();
  if (corpus.empty()) return report;

  IndexOptions options;
  options.segmentation = segmentation;
  const IndexStats stats = build_index(corpus, embedder, scratch_store, options);
  std::error_code ignored;
  std::filesystem::remove(scratch_store, ignored);

  report.blocks = stats.summary.block_count;
  report.block_tokens = stats.block_tokens;
  report.modeled_block_cost = stats.modeled_block_cost;
  report.modeled_whole_cost = stats.modeled_whole_cost;
  report.modeled_ratio = stats.modeled_whole_cost == 0
                             ? 0.0
                             : static_cast<double>(stats.modeled_block_cost) /
                                   static_cast<double>(stats.modeled_whole_cost);
  report.blockwise_seconds = stats.wall_seconds;
  report.segment_seconds = stats.segment_seconds;
  report.embed_seconds = stats.embed_seconds;
  report.write_seconds = stats.write_seconds;

  // The whole-document pass sees exactly the tokens the kept blocks cover.
  std::vector<std::string> whole_texts;
  for (const CorpusRecord& record : corpus) {
    const auto blocks = truncate_blocks(segment(record.full_text(), segmentation), segmentation.max_blocks);
    std::vector<Token> kept;
    for (const Block& block : blocks) kept.insert(kept.end(), block.tokens.begin(), block.tokens.end());
    if (!kept.empty()) whole_texts.push_back(join_tokens(kept));
  }
  const auto start = std::chrono::steady_clock::now();
  for (const std::string& text : whole_texts) {
    (void)embedder.embed(std::span<const std::string>(&text, 1), EmbedderKind::Passage);
  }
  report.whole_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace breps
