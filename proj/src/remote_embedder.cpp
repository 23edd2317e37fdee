#include <httplib.h>

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <thread>

#include "breps/embedding.hpp"
#include "breps/error.hpp"

namespace breps {
namespace {

using nlohmann::json;

// Strips a trailing slash and any path; httplib wants scheme://host:port.
std::string base_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(Errc::InvalidConfig, "embedder.url must look like http://host:port, got '" + url + "'");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  return path_start == std::string::npos ? url : url.substr(0, path_start);
}


std::vector<Representation> parse_vectors(const std::string& body, std::size_t expected_count,
                                          std::size_t expected_dim) {
  json payload;
  try {
    payload = json::parse(body);
  } catch (const json::parse_error& e) {
    throw Error(Errc::InvalidResponse, std::string("embed response is not JSON: ") + e.what());
  }
  if (!payload.is_object() || !payload.contains("dim") || !payload["dim"].is_number_integer() ||
      !payload.contains("vectors") || !payload["vectors"].is_array()) {
    throw Error(Errc::InvalidResponse, "embed response lacks integer 'dim' and array 'vectors'");
  }
  const auto dim = payload["dim"].get<std::int64_t>();
  if (dim != static_cast<std::int64_t>(expected_dim)) {
    throw Error(Errc::DimensionMismatch, "service dim " + std::to_string(dim) +
                                             " != configured dim " + std::to_string(expected_dim));
  }
  const json& vectors = payload["vectors"];
  if (vectors.size() != expected_count) {
    throw Error(Errc::InvalidResponse, "service returned " + std::to_string(vectors.size()) +
                                           " vectors for " + std::to_string(expected_count) +
                                           " texts");
  }
  std::vector<Representation> out;
  out.reserve(expected_count);
  for (const json& row : vectors) {
    if (!row.is_array()) throw Error(Errc::InvalidResponse, "vector is not an array");
    if (row.size() != expected_dim) {
      throw Error(Errc::DimensionMismatch, "vector of length " + std::to_string(row.size()) +
                                               " != dim " + std::to_string(expected_dim));
    }
    Representation rep;
    rep.values.reserve(expected_dim);
    for (const json& x : row) {
      if (!x.is_number()) throw Error(Errc::InvalidResponse, "vector entry is not a number");
      const double v = x.get<double>();
      if (!std::isfinite(v)) throw Error(Errc::InvalidResponse, "vector entry is not finite");
      rep.values.push_back(static_cast<float>(v));
    }
    out.push_back(std::move(rep));
  }
  return out;
}

}  // namespace

RemoteEmbedder::RemoteEmbedder(RemoteEmbedderOptions options)
    : options_(std::move(options)), scheme_host_port_(base_url(options_.url)) {
  if (options_.dim == 0) throw Error(Errc::InvalidConfig, "embedder.dim must be >= 1");
  if (options_.max_batch == 0) throw Error(Errc::InvalidConfig, "embedder.max_batch must be >= 1");
  if (options_.attempts < 1) throw Error(Errc::InvalidConfig, "embedder.attempts must be >= 1");
}

ServiceHealth RemoteEmbedder::health() const {
  httplib::Client client(scheme_host_port_);
  client.set_connection_timeout(options_.timeout);
  client.set_read_timeout(options_.timeout);
  auto result = client.Get("/health");
  if (!result) {
    throw Error(Errc::ServiceUnavailable,
                "GET " + scheme_host_port_ + "/health failed: " + httplib::to_string(result.error()));
  }
  if (result->status != 200) {
    throw Error(Errc::ServiceUnavailable, "health returned HTTP " + std::to_string(result->status));
  }
  try {
    const json payload = json::parse(result->body);
    return ServiceHealth{payload.at("status").get<std::string>(), payload.at("dim").get<std::size_t>()};
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidResponse, std::string("malformed health response: ") + e.what());
  }
}

std::vector<Representation> RemoteEmbedder::embed_formatted(
    std::span<const std::string> formatted, EmbedderKind kind) const {
  std::vector<Representation> out;
  out.reserve(formatted.size());
  for (std::size_t start = 0; start < formatted.size(); start += options_.max_batch) {
    const std::size_t count = std::min(options_.max_batch, formatted.size() - start);
    auto part = embed_batch(formatted.subspan(start, count), kind);
    std::move(part.begin(), part.end(), std::back_inserter(out));
  }
  return out;
}

std::vector<Representation> RemoteEmbedder::embed_batch(std::span<const std::string> batch,
                                                        EmbedderKind kind) const {
  if (batch.empty()) return {};
  const json request = {{"texts", json(std::vector<std::string>(batch.begin(), batch.end()))},
                        {"kind", std::string(kind_name(kind))}};
  const std::string body = request.dump();

  httplib::Client client(scheme_host_port_);
  client.set_connection_timeout(options_.timeout);
  client.set_read_timeout(options_.timeout);
  client.set_write_timeout(options_.timeout);

  auto backoff = options_.initial_backoff;
  std::string last_failure;
  for (int attempt = 1; attempt <= options_.attempts; ++attempt) {
    auto result = client.Post("/embed", body, "application/json");
    if (!result) {
      last_failure = httplib::to_string(result.error());
    } else if (result->status == 200) {
      return parse_vectors(result->body, batch.size(), options_.dim);
    } else if (result->status == 413) {
      if (batch.size() == 1) {
        throw Error(Errc::InvalidResponse, "service rejected a single text as too large (413)");
      }
      const std::size_t half = batch.size() / 2;
      auto head = embed_batch(batch.first(half), kind);
      auto tail = embed_batch(batch.subspan(half), kind);
      std::move(tail.begin(), tail.end(), std::back_inserter(head));
      return head;
    } else if (result->status >= 400 && result->status < 500) {
      throw Error(Errc::InvalidResponse, "service rejected request with HTTP " +
                                             std::to_string(result->status) + ": " + result->body);
    } else {
      last_failure = "HTTP " + std::to_string(result->status);
    }
    if (attempt < options_.attempts) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
  throw Error(Errc::ServiceUnavailable, "POST " + scheme_host_port_ + "/embed failed after " +
                                            std::to_string(options_.attempts) +
                                            " attempts: " + last_failure);
}

}  // namespace breps
