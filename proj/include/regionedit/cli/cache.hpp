#pragma once

#include <atomic>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

namespace regionedit::cli {

/// SHA-256 hex digest.
std::string sha256_hex(std::string_view bytes);

/// Content-addressed directory cache. Each entry lives in
/// root/<first 2 hex>/<full hex>/ as payload.bin plus meta.json; the meta
/// records the payload digest so corruption is detected on read and the
/// entry evicted.
class DiskCache {
public:
    explicit DiskCache(std::filesystem::path root);

    /// Payload for the key material, or nullopt on miss/corruption.
    std::optional<std::string> get(const std::string& key_material) const;
    void put(const std::string& key_material, std::string_view payload) const;

    const std::filesystem::path& root() const { return root_; }

    long hits() const { return hits_.load(); }
    long misses() const { return misses_.load(); }
    long evictions() const { return evictions_.load(); }

    /// Removes every entry. Returns the number of entries removed.
    long clear() const;
    long entry_count() const;

private:
    std::filesystem::path entry_dir(const std::string& digest) const;

    std::filesystem::path root_;
    mutable std::mutex io_mutex_;
    mutable std::atomic<long> hits_{0}, misses_{0}, evictions_{0};
};

/// Cache root resolution: explicit path if nonempty, else the
/// REGIONEDIT_CACHE_DIR environment variable, else `.regionedit-cache`
/// under the current directory.
std::filesystem::path resolve_cache_root(const std::string& explicit_root);

}  // namespace regionedit::cli
