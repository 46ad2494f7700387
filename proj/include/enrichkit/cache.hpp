#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "enrichkit/model.hpp"

namespace enrichkit {

/// Lowercase hex SHA-256 of the given bytes.
std::string sha256_hex(std::string_view bytes);

/// One cached remote response. `bucket` is the source the response came
/// from: "media_event", "dataset", "kg_entity", or "wikifier".
struct cache_entry {
    std::string bucket;
    std::string query_hash;
    std::string payload;
    instant fetched_at{};
};

/// Content-addressed response cache backed by plain files:
///
///   <root>/<bucket>/<query_hash>            raw payload bytes
///   <root>/<bucket>/<query_hash>.meta.json  sidecar metadata
///
/// Entries survive process restarts; a repeated put with the same hash
/// overwrites (last writer wins). Reads need no locking; writes are
/// serialized. The bundled fixture pack uses this exact layout, so a
/// fixture directory is just a pre-warmed cache.
class cache_store {
public:
    explicit cache_store(std::filesystem::path root);

    void put(const cache_entry& entry);
    std::optional<cache_entry> get(std::string_view bucket, std::string_view query_hash) const;

    std::size_t count(std::string_view bucket) const;

    /// Removes every entry in the bucket; returns how many were removed.
    std::size_t clear(std::string_view bucket);

    /// (bucket, entry count) for every bucket directory present, sorted
    /// by bucket name.
    std::vector<std::pair<std::string, std::size_t>> stats() const;

    const std::filesystem::path& root() const { return root_; }

private:
    std::filesystem::path entry_path(std::string_view bucket, std::string_view query_hash) const;

    std::filesystem::path root_;
    mutable std::mutex write_mutex_;
};

} // namespace enrichkit
