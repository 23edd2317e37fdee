#include "breps/representation_store.hpp"

#include <fcntl.h>
#include <sys/mman.h>
#include <sys/stat.h>
#include <unistd.h>

#include <bit>
#include <chrono>
#include <cstring>

#include "breps/error.hpp"

namespace breps {
namespace {

void put_u32(std::string& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

std::string header_bytes(std::uint32_t dim, std::uint64_t doc_count, std::uint64_t created) {
  std::string buf(kStoreMagic);
  put_u32(buf, dim);
  put_u64(buf, doc_count);
  put_u64(buf, created);
  return buf;
}

void check_doc_id(std::string_view doc_id) {
  if (doc_id.empty()) throw Error(Errc::InvalidArgument, "doc_id must not be empty");
  if (doc_id.find('\n') != std::string_view::npos) {
    throw Error(Errc::InvalidArgument, "doc_id must not contain a newline");
  }
  if (doc_id.size() > UINT32_MAX) throw Error(Errc::InvalidArgument, "doc_id too long");
}

}  // namespace

// ---------------------------------------------------------------- writer ---

StoreWriter::StoreWriter(std::filesystem::path path, std::size_t dim,
                         std::optional<std::uint64_t> created_unix_seconds)
    : path_(std::move(path)), dim_(dim) {
  if (dim == 0 || dim > UINT32_MAX) throw Error(Errc::InvalidArgument, "store dim must be in [1, 2^32)");
  temp_path_ = path_;
  temp_path_ += ".tmp." + std::to_string(::getpid());
  out_.open(temp_path_, std::ios::binary | std::ios::trunc);
  if (!out_) throw Error(Errc::IoError, "cannot create " + temp_path_.string());
  const std::uint64_t created =
      created_unix_seconds.value_or(static_cast<std::uint64_t>(
          std::chrono::duration_cast<std::chrono::seconds>(
              std::chrono::system_clock::now().time_since_epoch())
              .count()));
  const std::string header = header_bytes(static_cast<std::uint32_t>(dim), 0, created);
  out_.write(header.data(), static_cast<std::streamsize>(header.size()));
  if (!out_) throw Error(Errc::IoError, "write failed on " + temp_path_.string());
}

StoreWriter::~StoreWriter() {
  if (!finished_) {
    out_.close();
    std::error_code ignored;
    std::filesystem::remove(temp_path_, ignored);
  }
}

void StoreWriter::add(const StoredDocument& document) {
  if (finished_) throw Error(Errc::InvalidArgument, "store writer already finished");
  check_doc_id(document.doc_id);
  for (const Representation& v : document.block_vectors) {
    if (v.dim() != dim_) {
      throw Error(Errc::DimensionMismatch, "document '" + document.doc_id + "' has a vector of dim " +
                                               std::to_string(v.dim()) + ", store dim is " +
                                               std::to_string(dim_));
    }
  }
  if (!seen_.insert(document.doc_id).second) {
    throw Error(Errc::DuplicateDocId, "doc_id '" + document.doc_id + "' appears twice");
  }

  std::string buf;
  buf.reserve(8 + document.doc_id.size() + document.block_vectors.size() * dim_ * 4);
  put_u32(buf, static_cast<std::uint32_t>(document.doc_id.size()));
  buf += document.doc_id;
  put_u32(buf, static_cast<std::uint32_t>(document.block_vectors.size()));
  for (const Representation& v : document.block_vectors) {
    for (const float x : v.values) put_u32(buf, std::bit_cast<std::uint32_t>(x));
  }
  out_.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out_) throw Error(Errc::IoError, "write failed on " + temp_path_.string());

  index_.push_back(IndexEntry{document.doc_id, offset_});
  offset_ += buf.size();
  summary_.doc_count += 1;
  summary_.block_count += document.block_vectors.size();
}

StoreSummary StoreWriter::finish() {
  if (finished_) return summary_;
  std::string buf;
  for (const IndexEntry& entry : index_) {
    put_u32(buf, static_cast<std::uint32_t>(entry.doc_id.size()));
    buf += entry.doc_id;
    put_u64(buf, entry.offset);
  }
  out_.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  std::string count;
  put_u64(count, summary_.doc_count);
  out_.seekp(static_cast<std::streamoff>(kStoreMagic.size() + 4));
  out_.write(count.data(), static_cast<std::streamsize>(count.size()));
  out_.flush();
  if (!out_) throw Error(Errc::IoError, "write failed on " + temp_path_.string());
  out_.close();
  std::error_code ec;
  std::filesystem::rename(temp_path_, path_, ec);
  if (ec) throw Error(Errc::IoError, "cannot rename store into place: " + ec.message());
  finished_ = true;
  return summary_;
}

StoreSummary write_store(const std::filesystem::path& path,
                         std::span<const StoredDocument> documents, std::size_t dim,
                         std::optional<std::uint64_t> created_unix_seconds) {
  StoreWriter writer(path, dim, created_unix_seconds);
  for (const StoredDocument& doc : documents) writer.add(doc);
  return writer.finish();
}

// ---------------------------------------------------------------- reader ---

struct Store::Mapping {
  const unsigned char* data = nullptr;
  std::size_t size = 0;

  Mapping() = default;
  Mapping(const Mapping&) = delete;
  Mapping& operator=(const Mapping&) = delete;
  ~Mapping() {
    if (data != nullptr && size > 0) ::munmap(const_cast<unsigned char*>(data), size);
  }
};

Store::Store(Store&&) noexcept = default;
Store& Store::operator=(Store&&) noexcept = default;
Store::~Store() = default;

Store Store::open(const std::filesystem::path& path) {
  const int fd = ::open(path.c_str(), O_RDONLY);
  if (fd < 0) throw Error(Errc::IoError, "cannot open store " + path.string() + ": " + std::strerror(errno));
  struct stat st {};
  if (::fstat(fd, &st) != 0) {
    ::close(fd);
    throw Error(Errc::IoError, "cannot stat store " + path.string());
  }
  Store store;
  store.mapping_ = std::make_unique<Mapping>();
  const auto size = static_cast<std::size_t>(st.st_size);
  if (size > 0) {
    void* addr = ::mmap(nullptr, size, PROT_READ, MAP_PRIVATE, fd, 0);
    if (addr == MAP_FAILED) {
      ::close(fd);
      throw Error(Errc::IoError, "cannot map store " + path.string());
    }
    store.mapping_->data = static_cast<const unsigned char*>(addr);
    store.mapping_->size = size;
  }
  ::close(fd);

  const unsigned char* data = store.mapping_->data;
  if (size < kStoreMagic.size() ||
      std::memcmp(data, kStoreMagic.data(), kStoreMagic.size()) != 0) {
    throw Error(Errc::BadMagic, path.string() + " is not a BREPSST1 store");
  }
  if (size < kStoreHeaderSize) throw Error(Errc::TruncatedFile, "store header is truncated");
  store.dim_ = get_u32(data + 8);
  const std::uint64_t doc_count = get_u64(data + 12);
  store.created_ = get_u64(data + kStoreTimestampOffset);
  if (store.dim_ == 0) throw Error(Errc::IoError, "store declares dim 0");

  auto need = [&](std::uint64_t pos, std::uint64_t bytes) {
    if (bytes > size || pos > size - bytes) {
      throw Error(Errc::TruncatedFile, path.string() + " ends inside a record at byte " + std::to_string(pos));
    }
  };

  // Walk the records once; this locates the index and validates sizes.
  std::vector<Record> records;
  records.reserve(doc_count);
  std::uint64_t pos = kStoreHeaderSize;
  const std::uint64_t vector_bytes = static_cast<std::uint64_t>(store.dim_) * 4;
  for (std::uint64_t i = 0; i < doc_count; ++i) {
    need(pos, 4);
    const std::uint32_t id_len = get_u32(data + pos);
    need(pos + 4, static_cast<std::uint64_t>(id_len) + 4);
    const std::uint32_t n_blocks = get_u32(data + pos + 4 + id_len);
    const std::uint64_t payload = static_cast<std::uint64_t>(n_blocks) * vector_bytes;
    need(pos + 8 + id_len, payload);
    records.push_back(Record{pos, n_blocks});
    pos += 8 + id_len + payload;
  }

  store.doc_ids_.reserve(doc_count);
  store.index_.reserve(doc_count);
  for (std::uint64_t i = 0; i < doc_count; ++i) {
    need(pos, 4);
    const std::uint32_t id_len = get_u32(data + pos);
    need(pos + 4, static_cast<std::uint64_t>(id_len) + 8);
    std::string id(reinterpret_cast<const char*>(data + pos + 4), id_len);
    const std::uint64_t offset = get_u64(data + pos + 4 + id_len);
    pos += 12 + id_len;
    const Record& record = records[i];
    const std::uint32_t stored_len = get_u32(data + record.offset);
    if (offset != record.offset || stored_len != id_len ||
        std::memcmp(data + record.offset + 4, id.data(), id_len) != 0) {
      throw Error(Errc::IoError, "store index entry " + std::to_string(i) + " does not match its record");
    }
    if (!store.index_.emplace(id, record).second) {
      throw Error(Errc::DuplicateDocId, "store contains doc_id '" + id + "' twice");
    }
    store.block_count_ += record.n_blocks;
    store.max_blocks_ = std::max<std::size_t>(store.max_blocks_, record.n_blocks);
    store.doc_ids_.push_back(std::move(id));
  }
  if (pos != size) throw Error(Errc::IoError, "unexpected trailing bytes after store index");
  return store;
}

bool Store::contains(std::string_view doc_id) const {
  return index_.find(std::string(doc_id)) != index_.end();
}

std::optional<StoredDocument> Store::get(std::string_view doc_id) const {
  const auto it = index_.find(std::string(doc_id));
  if (it == index_.end()) return std::nullopt;
  return decode(doc_id, it->second);
}

StoredDocument Store::decode(std::string_view doc_id, const Record& record) const {
  const unsigned char* p = mapping_->data + record.offset;
  p += 4 + get_u32(p) + 4;
  StoredDocument doc;
  doc.doc_id = std::string(doc_id);
  doc.block_vectors.resize(record.n_blocks);
  for (Representation& v : doc.block_vectors) {
    v.values.resize(dim_);
    for (float& x : v.values) {
      x = std::bit_cast<float>(get_u32(p));
      p += 4;
    }
  }
  return doc;
}

}  // namespace breps
