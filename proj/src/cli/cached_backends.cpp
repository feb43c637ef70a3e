#include "regionedit/cli/cached_backends.hpp"

#include <cstring>
#include <sstream>

#include "regionedit/errors.hpp"

namespace regionedit::cli {
namespace {

void append_i64(std::string& out, std::int64_t v) {
    out.append(reinterpret_cast<const char*>(&v), sizeof(v));
}

void append_doubles(std::string& out, const double* data, std::size_t count) {
    out.append(reinterpret_cast<const char*>(data), count * sizeof(double));
}

struct Reader {
    const char* p;
    const char* end;

    explicit Reader(std::string_view bytes)
        : p(bytes.data()), end(bytes.data() + bytes.size()) {}

    void take(void* dst, std::size_t n) {
        if (p + n > end) throw IoError("cache payload: truncated");
        std::memcpy(dst, p, n);
        p += n;
    }
    std::int64_t take_i64() {
        std::int64_t v = 0;
        take(&v, sizeof(v));
        return v;
    }
    void expect_tag(const char tag[4]) {
        char got[4];
        take(got, 4);
        if (std::memcmp(got, tag, 4) != 0)
            throw IoError("cache payload: bad tag");
    }
};

}  // namespace

std::string image_bytes(const ImageBuffer& image) {
    std::string out;
    out.append("IMG1", 4);
    append_i64(out, image.height());
    append_i64(out, image.width());
    for (const auto& plane : image.plane)
        append_doubles(out, plane.data(), static_cast<std::size_t>(plane.size()));
    return out;
}

ImageBuffer image_from_bytes(std::string_view bytes) {
    Reader r(bytes);
    r.expect_tag("IMG1");
    const Index h = r.take_i64();
    const Index w = r.take_i64();
    if (h < 1 || w < 1) throw IoError("cache payload: bad image dims");
    ImageBuffer img(h, w);
    for (auto& plane : img.plane)
        r.take(plane.data(), static_cast<std::size_t>(plane.size()) * sizeof(double));
    return img;
}

std::string mask_bytes(const RegionMask& mask) {
    std::string out;
    out.append("MSK1", 4);
    append_i64(out, mask.height());
    append_i64(out, mask.width());
    out.append(reinterpret_cast<const char*>(mask.data.data()),
               static_cast<std::size_t>(mask.data.size()));
    return out;
}

std::string features_bytes(const FeatureMap& fmap, const AttentionMap& attn) {
    std::string out;
    out.append("FTR1", 4);
    append_i64(out, fmap.channels());
    append_i64(out, fmap.grid_h);
    append_i64(out, fmap.grid_w);
    append_doubles(out, fmap.data.data(), static_cast<std::size_t>(fmap.data.size()));
    append_doubles(out, attn.scores.data(),
                   static_cast<std::size_t>(attn.scores.size()));
    return out;
}

std::pair<FeatureMap, AttentionMap> features_from_bytes(std::string_view bytes) {
    Reader r(bytes);
    r.expect_tag("FTR1");
    const Index d = r.take_i64();
    const Index h = r.take_i64();
    const Index w = r.take_i64();
    if (d < 1 || h < 1 || w < 1) throw IoError("cache payload: bad feature dims");
    FeatureMap fmap = FeatureMap::zeros(d, h, w);
    r.take(fmap.data.data(), static_cast<std::size_t>(fmap.data.size()) * sizeof(double));
    AttentionMap attn;
    attn.scores.resize(h, w);
    r.take(attn.scores.data(),
           static_cast<std::size_t>(attn.scores.size()) * sizeof(double));
    return {std::move(fmap), std::move(attn)};
}

std::pair<FeatureMap, AttentionMap> CachedFeatureBackend::extract_impl(
    const ImageBuffer& image) const {
    std::ostringstream key;
    key << "features|v1|" << identifier() << "|" << checksum() << "|"
        << sha256_hex(image_bytes(image));
    if (auto payload = cache_->get(key.str()))
        return features_from_bytes(*payload);
    auto out = inner_->extract(image);
    cache_->put(key.str(), features_bytes(out.first, out.second));
    return out;
}

ImageBuffer CachedEditorBackend::edit_impl(const ImageBuffer& image,
                                           const RegionMask& mask,
                                           const std::string& prompt,
                                           std::uint64_t seed) const {
    std::ostringstream key;
    key << "edit|v1|" << identifier() << "|" << checksum() << "|"
        << sha256_hex(image_bytes(image)) << "|" << sha256_hex(mask_bytes(mask))
        << "|" << sha256_hex(prompt) << "|" << seed;
    if (auto payload = cache_->get(key.str()))
        return image_from_bytes(*payload);
    ImageBuffer out = inner_->edit(image, mask, prompt, seed);
    cache_->put(key.str(), image_bytes(out));
    return out;
}

}  // namespace regionedit::cli
