#include "breps/corpus_io.hpp"

#include <chrono>
#include <json.hpp>
#include <sstream>

#include "breps/error.hpp"
#include "breps/parallel.hpp"

namespace breps {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

std::string required_string(const json& obj, const char* key, std::size_t line, const char* what) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw Error(Errc::MalformedLine, std::string(what) + " line " + std::to_string(line) +
                                         ": missing string field '" + key + "'");
  }
  return it->get<std::string>();
}

json parse_line(const std::string& line, std::size_t number, const char* what) {
  try {
    json obj = json::parse(line);
    if (!obj.is_object()) throw Error(Errc::MalformedLine, std::string(what) + " line " + std::to_string(number) + ": not an object");
    return obj;
  } catch (const json::parse_error& e) {
    throw Error(Errc::MalformedLine, std::string(what) + " line " + std::to_string(number) + ": " + e.what());
  }
}

struct Processed {
  StoredDocument document;
  std::uint64_t block_tokens = 0;
  std::uint64_t block_cost = 0;
  std::uint64_t whole_cost = 0;
  double segment_seconds = 0.0;
  double embed_seconds = 0.0;
};

Processed process(const CorpusRecord& record, const Embedder& embedder, const SegmentationConfig& config) {
  Processed out;
  out.document.doc_id = record.doc_id;
  auto start = Clock::now();
  const auto blocks = truncate_blocks(segment(record.full_text(), config), config.max_blocks);
  out.segment_seconds = seconds_since(start);

  std::vector<std::string> texts;
  texts.reserve(blocks.size());
  for (const Block& block : blocks) {
    texts.push_back(block.text);
    out.block_tokens += block.token_count;
    out.block_cost += embedding_cost(block.token_count);
  }
  out.whole_cost = embedding_cost(out.block_tokens);
  if (!texts.empty()) {
    start = Clock::now();
    out.document.block_vectors = embedder.embed(texts, EmbedderKind::Passage);
    out.embed_seconds = seconds_since(start);
  }
  return out;
}

template <typename Source>
IndexStats build(Source&& next_record, const Embedder& embedder, const std::filesystem::path& store_path,
                 const IndexOptions& options) {
  options.segmentation.validate();
  const auto wall_start = Clock::now();
  IndexStats stats;
  StoreWriter writer(store_path, embedder.dim(), options.created_unix_seconds);
  const std::size_t workers = std::max<std::size_t>(1, options.parallelism);
  const std::size_t chunk = workers * 8;

  std::vector<CorpusRecord> pending;
  std::vector<Processed> results;
  bool more = true;
  while (more) {
    pending.clear();
    while (pending.size() < chunk) {
      auto record = next_record();
      if (!record) {
        more = false;
        break;
      }
      pending.push_back(std::move(*record));
    }
    results.assign(pending.size(), Processed{});
    parallel_for(pending.size(), workers, [&](std::size_t i) {
      results[i] = process(pending[i], embedder, options.segmentation);
    });
    const auto write_start = Clock::now();
    for (Processed& r : results) {
      writer.add(r.document);
      stats.block_tokens += r.block_tokens;
      stats.modeled_block_cost += r.block_cost;
      stats.modeled_whole_cost += r.whole_cost;
      stats.segment_seconds += r.segment_seconds;
      stats.embed_seconds += r.embed_seconds;
    }
    stats.write_seconds += seconds_since(write_start);
  }
  const auto finish_start = Clock::now();
  stats.summary = writer.finish();
  stats.write_seconds += seconds_since(finish_start);
  stats.wall_seconds = seconds_since(wall_start);
  return stats;
}

}  // namespace

std::string CorpusRecord::full_text() const {
  if (title && !title->empty()) return *title + " " + text;
  return text;
}

CorpusReader::CorpusReader(const std::filesystem::path& path) : in_(path) {
  if (!in_) throw Error(Errc::IoError, "corpus not found: " + path.string());
}

std::optional<CorpusRecord> CorpusReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    if (blank(line)) continue;
    const json obj = parse_line(line, line_, "corpus");
    CorpusRecord record;
    record.doc_id = required_string(obj, "doc_id", line_, "corpus");
    record.text = required_string(obj, "text", line_, "corpus");
    if (const auto it = obj.find("title"); it != obj.end() && !it->is_null()) {
      if (!it->is_string()) {
        throw Error(Errc::MalformedLine, "corpus line " + std::to_string(line_) + ": 'title' must be a string");
      }
      record.title = it->get<std::string>();
    }
    if (record.doc_id.empty() || record.doc_id.find('\n') != std::string::npos) {
      throw Error(Errc::MalformedLine, "corpus line " + std::to_string(line_) + ": invalid doc_id");
    }
    return record;
  }
  return std::nullopt;
}

std::vector<CorpusRecord> load_corpus(const std::filesystem::path& path) {
  CorpusReader reader(path);
  std::vector<CorpusRecord> out;
  while (auto record = reader.next()) out.push_back(std::move(*record));
  return out;
}

std::vector<QueryRecord> load_queries(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "queries not found: " + path.string());
  std::vector<QueryRecord> out;
  std::string line;
  for (std::size_t number = 1; std::getline(in, line); ++number) {
    if (blank(line)) continue;
    const json obj = parse_line(line, number, "queries");
    QueryRecord record;
    // Query ids are often numeric in public collections.
    if (const auto it = obj.find("query_id"); it != obj.end() && it->is_number_integer()) {
      record.query_id = std::to_string(it->get<long long>());
    } else {
      record.query_id = required_string(obj, "query_id", number, "queries");
    }
    record.text = required_string(obj, "text", number, "queries");
    out.push_back(std::move(record));
  }
  return out;
}

std::vector<TripletRecord> load_triplets(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "triplets not found: " + path.string());
  std::vector<TripletRecord> out;
  std::string line;
  for (std::size_t number = 1; std::getline(in, line); ++number) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (blank(line)) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string field; std::getline(ss, field, '\t');) fields.push_back(field);
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty() || fields[2].empty()) {
      throw Error(Errc::MalformedLine, "triplets line " + std::to_string(number) +
                                           ": expected query_id<TAB>positive<TAB>negative");
    }
    out.push_back(TripletRecord{fields[0], fields[1], fields[2]});
  }
  return out;
}

IndexStats build_index(CorpusReader& corpus, const Embedder& embedder,
                       const std::filesystem::path& store_path, const IndexOptions& options) {
  return build([&] { return corpus.next(); }, embedder, store_path, options);
}

IndexStats build_index(std::span<const CorpusRecord> corpus, const Embedder& embedder,
                       const std::filesystem::path& store_path, const IndexOptions& options) {
  std::size_t pos = 0;
  return build(
      [&]() -> std::optional<CorpusRecord> {
        if (pos == corpus.size()) return std::nullopt;
        return corpus[pos++];
      },
      embedder, store_path, options);
}

}  // namespace breps
