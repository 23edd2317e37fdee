#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "breps/tokenization.hpp"

namespace breps {

/// A contiguous run of at most `max_block_tokens` tokens of a document.
struct Block {
  std::size_t index = 0;
  std::vector<Token> tokens;
  std::string text;
  std::size_t token_count = 0;
};

struct DynamicProgrammingStrategy {
  bool operator==(const DynamicProgrammingStrategy&) const = default;
};

struct FixedLengthStrategy {
  std::size_t length = 63;
  bool operator==(const FixedLengthStrategy&) const = default;
};

using SegmentationStrategy =
    std::variant<DynamicProgrammingStrategy, FixedLengthStrategy>;

struct SegmentationConfig {
  std::size_t max_block_tokens = 63;
  std::size_t max_blocks = 20;
  // Keyed by the punctuation character (UTF-8). Missing marks weigh 0.
  std::map<std::string, double> punctuation_weights = default_punctuation_weights();
  SegmentationStrategy strategy = DynamicProgrammingStrategy{};

  /// Sentence-final marks 3, clause marks 2, commas 1 (ASCII and CJK forms).
  static std::map<std::string, double> default_punctuation_weights();

  /// Throws Error(InvalidConfig) naming the offending field.
  void validate() const;
};

/// Weight earned by a split placed immediately after `token`.
double split_weight(const Token& token, const SegmentationConfig& config);

/// Block boundaries for a token sequence, as exclusive end offsets. The last
/// entry equals the token count; empty for an empty sequence.
std::vector<std::size_t> segment_boundaries(std::span<const Token> tokens,
                                            const SegmentationConfig& config);

/// Sum of split weights for a boundary list (the final boundary earns nothing).
double segmentation_score(std::span<const Token> tokens,
                          std::span<const std::size_t> boundaries,
                          const SegmentationConfig& config);

std::vector<Block> make_blocks(std::span<const Token> tokens,
                               std::span<const std::size_t> boundaries);

std::vector<Block> segment(std::string_view document_text,
                           const SegmentationConfig& config);

std::vector<Block> truncate_blocks(std::vector<Block> blocks, std::size_t n);

}  // namespace breps
