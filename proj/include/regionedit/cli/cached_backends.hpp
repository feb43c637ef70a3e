#pragma once

#include "regionedit/backend.hpp"
#include "regionedit/cli/cache.hpp"

namespace regionedit::cli {

/// Bit-exact binary codecs used for cache payloads and key material.
std::string image_bytes(const ImageBuffer& image);
ImageBuffer image_from_bytes(std::string_view bytes);
std::string mask_bytes(const RegionMask& mask);
std::string features_bytes(const FeatureMap& fmap, const AttentionMap& attn);
std::pair<FeatureMap, AttentionMap> features_from_bytes(std::string_view bytes);

/// Feature extraction memoized on (backend identity, image content).
class CachedFeatureBackend : public FeatureBackend {
public:
    CachedFeatureBackend(const FeatureBackend& inner, const DiskCache& cache)
        : inner_(&inner), cache_(&cache) {}

    BackendCapability capability() const override { return inner_->capability(); }
    std::string identifier() const override { return inner_->identifier(); }
    std::string checksum() const override { return inner_->checksum(); }

private:
    std::pair<FeatureMap, AttentionMap> extract_impl(
        const ImageBuffer& image) const override;

    const FeatureBackend* inner_;
    const DiskCache* cache_;
};

/// Edits memoized on (backend identity, image, mask, prompt, seed).
class CachedEditorBackend : public EditorBackend {
public:
    CachedEditorBackend(const EditorBackend& inner, const DiskCache& cache)
        : inner_(&inner), cache_(&cache) {}

    BackendCapability capability() const override { return inner_->capability(); }
    std::string identifier() const override { return inner_->identifier(); }
    std::string checksum() const override { return inner_->checksum(); }

private:
    ImageBuffer edit_impl(const ImageBuffer& image, const RegionMask& mask,
                          const std::string& prompt,
                          std::uint64_t seed) const override;

    const EditorBackend* inner_;
    const DiskCache* cache_;
};

}  // namespace regionedit::cli
