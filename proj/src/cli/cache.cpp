#include "regionedit/cli/cache.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "regionedit/errors.hpp"

namespace regionedit::cli {
namespace {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cache: cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file_atomic(const fs::path& path, std::string_view bytes) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw IoError("cache: cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw IoError("cache: write failed " + tmp.string());
    }
    fs::rename(tmp, path);
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256: EVP_Digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out(static_cast<std::size_t>(len) * 2, '0');
    for (unsigned int i = 0; i < len; ++i) {
        out[2 * i] = hex[digest[i] >> 4];
        out[2 * i + 1] = hex[digest[i] & 0xF];
    }
    return out;
}

DiskCache::DiskCache(std::filesystem::path root) : root_(std::move(root)) {
    fs::create_directories(root_);
}

fs::path DiskCache::entry_dir(const std::string& digest) const {
    return root_ / digest.substr(0, 2) / digest;
}

std::optional<std::string> DiskCache::get(const std::string& key_material) const {
    const std::string digest = sha256_hex(key_material);
    const fs::path dir = entry_dir(digest);
    std::lock_guard<std::mutex> lock(io_mutex_);
    std::error_code ec;
    if (!fs::exists(dir / "payload.bin", ec) || !fs::exists(dir / "meta.json", ec)) {
        misses_.fetch_add(1);
        return std::nullopt;
    }
    try {
        const std::string payload = read_file(dir / "payload.bin");
        const nlohmann::json meta = nlohmann::json::parse(read_file(dir / "meta.json"));
        if (meta.at("payload_sha256").get<std::string>() == sha256_hex(payload) &&
            meta.at("key_sha256").get<std::string>() == digest) {
            hits_.fetch_add(1);
            return payload;
        }
    } catch (const std::exception&) {
        // fall through to eviction
    }
    fs::remove_all(dir, ec);
    evictions_.fetch_add(1);
    misses_.fetch_add(1);
    return std::nullopt;
}

void DiskCache::put(const std::string& key_material, std::string_view payload) const {
    const std::string digest = sha256_hex(key_material);
    const fs::path dir = entry_dir(digest);
    std::lock_guard<std::mutex> lock(io_mutex_);
    fs::create_directories(dir);
    nlohmann::ordered_json meta{
        {"key_sha256", digest},
        {"payload_sha256", sha256_hex(payload)},
        {"bytes", payload.size()},
    };
    write_file_atomic(dir / "payload.bin", payload);
    write_file_atomic(dir / "meta.json", meta.dump(2) + "\n");
}

long DiskCache::clear() const {
    std::lock_guard<std::mutex> lock(io_mutex_);
    long removed = 0;
    std::error_code ec;
    for (const auto& shard : fs::directory_iterator(root_, ec)) {
        if (!shard.is_directory()) continue;
        for (const auto& entry : fs::directory_iterator(shard.path(), ec)) {
            fs::remove_all(entry.path(), ec);
            ++removed;
        }
        fs::remove(shard.path(), ec);
    }
    return removed;
}

long DiskCache::entry_count() const {
    std::lock_guard<std::mutex> lock(io_mutex_);
    long count = 0;
    std::error_code ec;
    for (const auto& shard : fs::directory_iterator(root_, ec)) {
        if (!shard.is_directory()) continue;
        for (const auto& entry : fs::directory_iterator(shard.path(), ec))
            if (entry.is_directory()) ++count;
    }
    return count;
}

std::filesystem::path resolve_cache_root(const std::string& explicit_root) {
    if (!explicit_root.empty()) return explicit_root;
    if (const char* env = std::getenv("REGIONEDIT_CACHE_DIR"); env && *env)
        return env;
    return fs::path(".regionedit-cache");
}

}  // namespace regionedit::cli
