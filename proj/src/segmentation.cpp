#include "breps/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "breps/error.hpp"

namespace breps {
namespace {

bool nearly_equal(double a, double b) {
  const double scale = std::max({1.0, std::abs(a), std::abs(b)});
  return std::abs(a - b) <= 1e-12 * scale;
}

// Optimal segmentation of the suffix starting at a position.
struct SuffixBest {
  double score = 0.0;
  std::size_t blocks = 0;
  std::size_t next = 0;  // end of the first block in the suffix
};

std::vector<std::size_t> dp_boundaries(std::span<const Token> tokens,
                                       const SegmentationConfig& config) {
  const std::size_t n = tokens.size();
  const std::size_t cap = config.max_block_tokens;
  std::vector<double> weight_after(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) weight_after[i] = split_weight(tokens[i], config);

  std::vector<SuffixBest> best(n + 1);
  for (std::size_t start = n; start-- > 0;) {
    SuffixBest chosen;
    bool have = false;
    const std::size_t last = std::min(n, start + cap);
    // Scanning ends in increasing order and replacing only on strict
    // improvement keeps the earliest split among equals.
    for (std::size_t end = start + 1; end <= last; ++end) {
      const double gain = end < n ? weight_after[end - 1] : 0.0;
      const double score = gain + best[end].score;
      const std::size_t blocks = 1 + best[end].blocks;
      bool better = !have;
      if (have) {
        if (!nearly_equal(score, chosen.score)) {
          better = score > chosen.score;
        } else {
          better = blocks < chosen.blocks;
        }
      }
      if (better) {
        chosen = SuffixBest{score, blocks, end};
        have = true;
      }
    }
    best[start] = chosen;
  }

  std::vector<std::size_t> boundaries;
  for (std::size_t pos = 0; pos < n; pos = best[pos].next) {
    boundaries.push_back(best[pos].next);
  }
  return boundaries;
}

std::vector<std::size_t> fixed_boundaries(std::size_t n, std::size_t length) {
  std::vector<std::size_t> boundaries;
  for (std::size_t end = length; end < n + length; end += length) {
    boundaries.push_back(std::min(end, n));
  }
  return boundaries;
}

}  // namespace

std::map<std::string, double> SegmentationConfig::default_punctuation_weights() {
  return {
      {".", 3.0}, {"!", 3.0}, {"?", 3.0}, {"。", 3.0}, {"！", 3.0}, {"？", 3.0},
      {";", 2.0}, {":", 2.0}, {"；", 2.0}, {"：", 2.0},
      {",", 1.0}, {"，", 1.0},
  };
}

void SegmentationConfig::validate() const {
  if (max_block_tokens < 1) {
    throw Error(Errc::InvalidConfig, "segmentation.max_block_tokens must be >= 1");
  }
  if (max_blocks < 1) {
    throw Error(Errc::InvalidConfig, "segmentation.max_blocks must be >= 1");
  }
  for (const auto& [mark, weight] : punctuation_weights) {
    if (!(weight >= 0.0) || !std::isfinite(weight)) {
      throw Error(Errc::InvalidConfig,
                  "segmentation.punctuation_weights[" + mark + "] must be finite and >= 0");
    }
  }
  if (const auto* fixed = std::get_if<FixedLengthStrategy>(&strategy)) {
    if (fixed->length < 1 || fixed->length > max_block_tokens) {
      throw Error(Errc::InvalidConfig,
                  "segmentation.fixed_length must be in [1, max_block_tokens]");
    }
  }
}

double split_weight(const Token& token, const SegmentationConfig& config) {
  if (token.kind != TokenKind::Punct) return 0.0;
  const auto it = config.punctuation_weights.find(token.text);
  return it == config.punctuation_weights.end() ? 0.0 : it->second;
}

std::vector<std::size_t> segment_boundaries(std::span<const Token> tokens,
                                            const SegmentationConfig& config) {
  config.validate();
  if (tokens.empty()) return {};
  if (const auto* fixed = std::get_if<FixedLengthStrategy>(&config.strategy)) {
    return fixed_boundaries(tokens.size(), fixed->length);
  }
  return dp_boundaries(tokens, config);
}

double segmentation_score(std::span<const Token> tokens,
                          std::span<const std::size_t> boundaries,
                          const SegmentationConfig& config) {
  double total = 0.0;
  for (const std::size_t end : boundaries) {
    if (end < tokens.size()) total += split_weight(tokens[end - 1], config);
  }
  return total;
}

std::vector<Block> make_blocks(std::span<const Token> tokens,
                               std::span<const std::size_t> boundaries) {
  std::vector<Block> blocks;
  blocks.reserve(boundaries.size());
  std::size_t start = 0;
  for (const std::size_t end : boundaries) {
    Block block;
    block.index = blocks.size();
    block.tokens.assign(tokens.begin() + static_cast<std::ptrdiff_t>(start),
                        tokens.begin() + static_cast<std::ptrdiff_t>(end));
    block.text = join_tokens(block.tokens);
    block.token_count = end - start;
    blocks.push_back(std::move(block));
    start = end;
  }
  return blocks;
}

std::vector<Block> segment(std::string_view document_text,
                           const SegmentationConfig& config) {
  const TokenSequence sequence = tokenize(document_text);
  const auto boundaries = segment_boundaries(sequence.tokens, config);
  return make_blocks(sequence.tokens, boundaries);
}

std::vector<Block> truncate_blocks(std::vector<Block> blocks, std::size_t n) {
  if (blocks.size() > n) blocks.resize(n);
  return blocks;
}

}  // namespace breps
