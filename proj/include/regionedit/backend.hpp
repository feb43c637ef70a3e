#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>

#include "regionedit/errors.hpp"
#include "regionedit/types.hpp"

namespace regionedit {

/// What a backend offers; serialized into capability JSON and the run
/// manifest. Fields irrelevant to a role stay 0 (for example an editor has
/// no feature_dim).
struct BackendCapability {
    Index patch_stride = 0;
    Index feature_dim = 0;
    Index embed_dim = 0;
    bool serial_only = false;
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual BackendCapability capability() const = 0;
    /// Stable name for manifests, e.g. "mock-feature".
    virtual std::string identifier() const = 0;
    /// Weight checksum for real adapters; mocks hash their seed.
    virtual std::string checksum() const = 0;
};

/// Frozen self-supervised feature extractor (the DINO ViT role).
class FeatureBackend : public Backend {
public:
    std::pair<FeatureMap, AttentionMap> extract(const ImageBuffer& image) const;

private:
    virtual std::pair<FeatureMap, AttentionMap> extract_impl(
        const ImageBuffer& image) const = 0;
};

/// Frozen joint text-image scorer (the CLIP role).
class ScorerBackend : public Backend {
public:
    EmbeddingVector embed_image(const ImageBuffer& image) const;
    EmbeddingVector embed_text(const std::string& text) const;
    /// Spatial tokens of the last visual layer, one row per token.
    MatX<double> patch_tokens(const ImageBuffer& image) const;

private:
    virtual EmbeddingVector embed_image_impl(const ImageBuffer& image) const = 0;
    virtual EmbeddingVector embed_text_impl(const std::string& text) const = 0;
    virtual MatX<double> patch_tokens_impl(const ImageBuffer& image) const = 0;
};

/// Frozen mask-conditioned editor (the inpainting diffusion role).
class EditorBackend : public Backend {
public:
    ImageBuffer edit(const ImageBuffer& image, const RegionMask& mask,
                     const std::string& prompt, std::uint64_t seed) const;

private:
    virtual ImageBuffer edit_impl(const ImageBuffer& image, const RegionMask& mask,
                                  const std::string& prompt,
                                  std::uint64_t seed) const = 0;
};

inline std::pair<FeatureMap, AttentionMap> extract_features(
    const FeatureBackend& backend, const ImageBuffer& image) {
    return backend.extract(image);
}

inline EmbeddingVector embed_image(const ScorerBackend& backend,
                                   const ImageBuffer& image) {
    return backend.embed_image(image);
}

inline EmbeddingVector embed_text(const ScorerBackend& backend,
                                  const std::string& text) {
    return backend.embed_text(text);
}

inline MatX<double> patch_tokens(const ScorerBackend& backend,
                                 const ImageBuffer& image) {
    return backend.patch_tokens(image);
}

inline ImageBuffer edit_image(const EditorBackend& backend, const ImageBuffer& image,
                              const RegionMask& mask, const std::string& prompt,
                              std::uint64_t seed) {
    return backend.edit(image, mask, prompt, seed);
}

/// The three model roles a run needs. Non-owning; lifetime managed by the
/// caller (see make_mock_backends in mock_backends.hpp).
struct BackendSet {
    const FeatureBackend* features = nullptr;
    const ScorerBackend* scorer = nullptr;
    const EditorBackend* editor = nullptr;
};

/// Contract constants for a real diffusion-inpainting adapter. The adapter
/// itself is out of scope for this build; docs/adapters.md describes how to
/// wire one against EditorBackend using these values.
struct DiffusionAdapterContract {
    static constexpr double kGuidanceScale = 7.5;
    static constexpr double kStrength = 0.75;
    static constexpr int kNativeResolution = 224;
};

inline std::pair<FeatureMap, AttentionMap> FeatureBackend::extract(
    const ImageBuffer& image) const {
    validate_image(image);
    auto out = extract_impl(image);
    if (out.first.grid_h != out.second.grid_h() ||
        out.first.grid_w != out.second.grid_w())
        throw BackendError(identifier() + ": feature/attention grid mismatch");
    return out;
}

inline EmbeddingVector ScorerBackend::embed_image(const ImageBuffer& image) const {
    validate_image(image);
    return embed_image_impl(image);
}

inline EmbeddingVector ScorerBackend::embed_text(const std::string& text) const {
    if (text.empty())
        throw std::invalid_argument("embed_text: empty text");
    return embed_text_impl(text);
}

inline MatX<double> ScorerBackend::patch_tokens(const ImageBuffer& image) const {
    validate_image(image);
    return patch_tokens_impl(image);
}

inline ImageBuffer EditorBackend::edit(const ImageBuffer& image,
                                       const RegionMask& mask,
                                       const std::string& prompt,
                                       std::uint64_t seed) const {
    validate_image(image);
    if (mask.height() != image.height() || mask.width() != image.width())
        throw std::invalid_argument("edit: mask dims must equal image dims");
    if (mask.empty_mask())
        throw std::invalid_argument("edit: empty mask");
    return edit_impl(image, mask, prompt, seed);
}

}  // namespace regionedit
