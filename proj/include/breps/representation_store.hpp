#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "breps/embedding.hpp"

namespace breps {

// On-disk layout, all integers and floats little-endian:
//
//   header   "BREPSST1" | u32 dim | u64 doc_count | u64 created_unix_seconds
//   records  per document: u32 id_len | id bytes | u32 n_blocks | n_blocks*dim f32
//   index    per document: u32 id_len | id bytes | u64 record offset
inline constexpr std::string_view kStoreMagic = "BREPSST1";
inline constexpr std::size_t kStoreHeaderSize = 8 + 4 + 8 + 8;
inline constexpr std::size_t kStoreTimestampOffset = 8 + 4 + 8;

struct StoredDocument {
  std::string doc_id;
  std::vector<Representation> block_vectors;

  bool operator==(const StoredDocument&) const = default;
};

struct StoreSummary {
  std::uint64_t doc_count = 0;
  std::uint64_t block_count = 0;

  bool operator==(const StoreSummary&) const = default;
};

/// Streams documents into a new store. Output goes to a temporary sibling file
/// that is renamed over `path` by finish(); an unfinished writer removes it.
class StoreWriter {
 public:
  StoreWriter(std::filesystem::path path, std::size_t dim,
              std::optional<std::uint64_t> created_unix_seconds = std::nullopt);
  ~StoreWriter();

  StoreWriter(const StoreWriter&) = delete;
  StoreWriter& operator=(const StoreWriter&) = delete;

  void add(const StoredDocument& document);
  StoreSummary finish();

  std::size_t dim() const noexcept { return dim_; }

 private:
  struct IndexEntry {
    std::string doc_id;
    std::uint64_t offset;
  };

  std::filesystem::path path_;
  std::filesystem::path temp_path_;
  std::size_t dim_;
  std::ofstream out_;
  std::uint64_t offset_ = kStoreHeaderSize;
  std::vector<IndexEntry> index_;
  std::unordered_set<std::string> seen_;
  StoreSummary summary_;
  bool finished_ = false;
};

StoreSummary write_store(const std::filesystem::path& path,
                         std::span<const StoredDocument> documents, std::size_t dim,
                         std::optional<std::uint64_t> created_unix_seconds = std::nullopt);

/// Read-only, memory-mapped view of a store file. Immutable after open and
/// safe to share between threads.
class Store {
 public:
  static Store open(const std::filesystem::path& path);

  Store(Store&&) noexcept;
  Store& operator=(Store&&) noexcept;
  ~Store();

  std::size_t dim() const noexcept { return dim_; }
  std::uint64_t doc_count() const noexcept { return doc_ids_.size(); }
  std::uint64_t block_count() const noexcept { return block_count_; }
  std::size_t max_blocks_per_document() const noexcept { return max_blocks_; }
  std::uint64_t created_unix_seconds() const noexcept { return created_; }

  /// Document ids in file order.
  const std::vector<std::string>& doc_ids() const noexcept { return doc_ids_; }

  bool contains(std::string_view doc_id) const;
  std::optional<StoredDocument> get(std::string_view doc_id) const;

 private:
  struct Mapping;
  struct Record {
    std::uint64_t offset;
    std::uint32_t n_blocks;
  };

  Store() = default;
  StoredDocument decode(std::string_view doc_id, const Record& record) const;

  std::unique_ptr<Mapping> mapping_;
  std::size_t dim_ = 0;
  std::uint64_t created_ = 0;
  std::uint64_t block_count_ = 0;
  std::size_t max_blocks_ = 0;
  std::vector<std::string> doc_ids_;
  std::unordered_map<std::string, Record> index_;
};

inline Store read_store(const std::filesystem::path& path) { return Store::open(path); }

}  // namespace breps
