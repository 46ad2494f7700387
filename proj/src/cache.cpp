#include "enrichkit/cache.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "enrichkit/errors.hpp"

namespace enrichkit {

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int digest_len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &digest_len, EVP_sha256(), nullptr) != 1) {
        throw error("sha256 digest computation failed");
    }
    static const char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(digest_len * 2);
    for (unsigned int i = 0; i < digest_len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0x0f]);
    }
    return out;
}

namespace {

bool is_meta_file(const std::filesystem::path& p) {
    return p.filename().string().ends_with(".meta.json");
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) {
        throw io_error("cannot open '" + p.string() + "' for reading");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) {
        throw io_error("read failure on '" + p.string() + "'");
    }
    return buf.str();
}

void write_file(const std::filesystem::path& p, std::string_view bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw io_error("cannot open '" + p.string() + "' for writing");
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw io_error("write failure on '" + p.string() + "'");
    }
}

} // namespace

cache_store::cache_store(std::filesystem::path root) : root_(std::move(root)) {}

std::filesystem::path cache_store::entry_path(std::string_view bucket, std::string_view query_hash) const {
    return root_ / std::string(bucket) / std::string(query_hash);
}

void cache_store::put(const cache_entry& entry) {
    if (entry.bucket.empty() || entry.query_hash.empty()) {
        throw precondition_error("cache_store::put: bucket and query_hash must be non-empty");
    }
    std::lock_guard<std::mutex> lock(write_mutex_);
    const auto path = entry_path(entry.bucket, entry.query_hash);
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) {
        throw io_error("cannot create cache directory '" + path.parent_path().string() + "': " + ec.message());
    }
    write_file(path, entry.payload);
    nlohmann::json meta{{"bucket", entry.bucket},
                        {"query_hash", entry.query_hash},
                        {"fetched_at", format_instant(entry.fetched_at)}};
    auto meta_path = path;
    meta_path += ".meta.json";
    write_file(meta_path, meta.dump() + "\n");
}

std::optional<cache_entry> cache_store::get(std::string_view bucket, std::string_view query_hash) const {
    const auto path = entry_path(bucket, query_hash);
    std::error_code ec;
    if (!std::filesystem::exists(path, ec) || ec) return std::nullopt;

    cache_entry entry;
    entry.bucket = std::string(bucket);
    entry.query_hash = std::string(query_hash);
    entry.payload = read_file(path);

    auto meta_path = path;
    meta_path += ".meta.json";
    if (std::filesystem::exists(meta_path, ec) && !ec) {
        nlohmann::json meta;
        try {
            meta = nlohmann::json::parse(read_file(meta_path));
            entry.fetched_at = parse_instant(meta.at("fetched_at").get<std::string>());
        } catch (const std::exception& e) {
            throw decode_error("malformed cache sidecar '" + meta_path.string() + "': " + e.what());
        }
    }
    return entry;
}

std::size_t cache_store::count(std::string_view bucket) const {
    const auto dir = root_ / std::string(bucket);
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec) || ec) return 0;
    std::size_t n = 0;
    for (const auto& item : std::filesystem::directory_iterator(dir)) {
        if (item.is_regular_file() && !is_meta_file(item.path())) ++n;
    }
    return n;
}

std::size_t cache_store::clear(std::string_view bucket) {
    std::lock_guard<std::mutex> lock(write_mutex_);
    const auto dir = root_ / std::string(bucket);
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec) || ec) return 0;
    std::size_t removed = 0;
    for (const auto& item : std::filesystem::directory_iterator(dir)) {
        if (!item.is_regular_file()) continue;
        const bool counts = !is_meta_file(item.path());
        std::filesystem::remove(item.path(), ec);
        if (ec) {
            throw io_error("cannot remove '" + item.path().string() + "': " + ec.message());
        }
        if (counts) ++removed;
    }
    return removed;
}

std::vector<std::pair<std::string, std::size_t>> cache_store::stats() const {
    std::vector<std::pair<std::string, std::size_t>> out;
    std::error_code ec;
    if (!std::filesystem::is_directory(root_, ec) || ec) return out;
    for (const auto& item : std::filesystem::directory_iterator(root_)) {
        if (!item.is_directory()) continue;
        const std::string bucket = item.path().filename().string();
        out.emplace_back(bucket, count(bucket));
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace enrichkit
