#include "breps/embedding.hpp"

#include <cmath>

#include "breps/error.hpp"
#include "breps/tokenization.hpp"

namespace breps {
namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

bool starts_with(std::string_view s, std::string_view prefix) {
  return !prefix.empty() && s.substr(0, prefix.size()) == prefix;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return !suffix.empty() && s.size() >= suffix.size() &&
         s.substr(s.size() - suffix.size()) == suffix;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return std::string(s.substr(first, last - first + 1));
}

Representation normalized(const std::vector<double>& sum) {
  double norm = 0.0;
  for (const double v : sum) norm += v * v;
  norm = std::sqrt(norm);
  Representation out;
  out.values.resize(sum.size());
  for (std::size_t i = 0; i < sum.size(); ++i) {
    out.values[i] = static_cast<float>(norm > 0.0 ? sum[i] / norm : 0.0);
  }
  return out;
}

}  // namespace

std::string_view kind_name(EmbedderKind kind) noexcept {
  return kind == EmbedderKind::Passage ? "passage" : "query";
}

std::string format_input(std::string_view text, EmbedderKind kind,
                         const InputFormat& format) {
  if (kind == EmbedderKind::Passage) {
    return format.passage_prefix + std::string(text) + format.terminator;
  }
  const TokenSequence tokens = tokenize(text);
  std::string body(text);
  if (tokens.size() > format.max_query_tokens) {
    body = join_tokens(std::span<const Token>(tokens.tokens).first(format.max_query_tokens));
  }
  return format.query_prefix + body + format.terminator;
}

std::uint64_t embedding_cost(std::uint64_t token_count) noexcept {
  return token_count * token_count;
}

std::vector<Representation> Embedder::embed(std::span<const std::string> texts,
                                            EmbedderKind kind) const {
  std::vector<std::string> formatted;
  formatted.reserve(texts.size());
  for (const std::string& text : texts) {
    if (kind == EmbedderKind::Passage && count_tokens(text) == 0) {
      throw Error(Errc::InvalidArgument, "passage body must not be empty");
    }
    formatted.push_back(format_input(text, kind, format_));
  }
  return embed_formatted(formatted, kind);
}

Representation Embedder::embed_one(std::string_view text, EmbedderKind kind) const {
  const std::string owned(text);
  auto out = embed(std::span<const std::string>(&owned, 1), kind);
  return std::move(out.front());
}

HashingEmbedder::HashingEmbedder(std::size_t dim, std::uint64_t seed)
    : dim_(dim), seed_(seed) {
  if (dim == 0) throw Error(Errc::InvalidConfig, "embedder.dim must be >= 1");
}

std::vector<std::string> HashingEmbedder::input_tokens(std::string_view formatted) const {
  const InputFormat& format = input_format();
  std::vector<std::string> out;
  std::string_view body = formatted;
  for (const std::string* prefix : {&format.passage_prefix, &format.query_prefix}) {
    if (starts_with(body, *prefix)) {
      out.push_back(trim(*prefix));
      body.remove_prefix(prefix->size());
      break;
    }
  }
  const bool terminated = ends_with(body, format.terminator);
  if (terminated) body.remove_suffix(format.terminator.size());
  for (Token& token : tokenize(body).tokens) out.push_back(std::move(token.text));
  if (terminated) out.push_back(format.terminator);
  return out;
}

std::vector<double> HashingEmbedder::token_vector(std::string_view token) const {
  std::uint64_t hash = kFnvOffset;
  for (const char c : token) {
    hash ^= static_cast<unsigned char>(c);
    hash *= kFnvPrime;
  }
  std::uint64_t state = hash ^ seed_;
  std::vector<double> v(dim_);
  for (double& x : v) {
    const double unit = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
    x = 2.0 * unit - 1.0;
  }
  return v;
}

std::vector<std::vector<double>> HashingEmbedder::token_vectors(
    std::string_view formatted) const {
  std::vector<std::vector<double>> out;
  for (const std::string& token : input_tokens(formatted)) {
    out.push_back(token_vector(token));
  }
  return out;
}

std::vector<Representation> HashingEmbedder::embed_formatted(
    std::span<const std::string> formatted, EmbedderKind) const {
  std::vector<Representation> out;
  out.reserve(formatted.size());
  for (const std::string& text : formatted) {
    std::vector<double> sum(dim_, 0.0);
    for (const auto& v : token_vectors(text)) {
      for (std::size_t i = 0; i < dim_; ++i) sum[i] += v[i];
    }
    out.push_back(normalized(sum));
  }
  return out;
}

std::vector<Representation> QuadraticCostEmbedder::embed_formatted(
    std::span<const std::string> formatted, EmbedderKind) const {
  const std::size_t d = dim();
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  std::vector<Representation> out;
  out.reserve(formatted.size());
  for (const std::string& text : formatted) {
    const auto x = token_vectors(text);
    const std::size_t t = x.size();
    std::vector<double> pooled(d, 0.0);
    std::vector<double> logits(t);
    for (std::size_t i = 0; i < t; ++i) {
      double max_logit = -INFINITY;
      for (std::size_t j = 0; j < t; ++j) {
        double dot = 0.0;
        for (std::size_t c = 0; c < d; ++c) dot += x[i][c] * x[j][c];
        logits[j] = dot * inv_sqrt_d;
        max_logit = std::max(max_logit, logits[j]);
      }
      double denom = 0.0;
      for (double& l : logits) denom += (l = std::exp(l - max_logit));
      for (std::size_t j = 0; j < t; ++j) {
        const double a = logits[j] / denom;
        for (std::size_t c = 0; c < d; ++c) pooled[c] += a * x[j][c];
      }
    }
    out.push_back(normalized(pooled));
  }
  return out;
}

}  // namespace breps
