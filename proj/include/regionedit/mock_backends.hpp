#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "regionedit/backend.hpp"

namespace regionedit {

/// Norm below which a lifted mean-RGB embedding is flagged degenerate.
inline constexpr double kMockLiftEps = 1e-8;
/// Half-width of the seeded texture the mock editor adds on top of the
/// prompt color.
inline constexpr double kMockTextureAmplitude = 0.005;

/// Shared source of truth for the deterministic mock backends: one seed and
/// a color lexicon mapping words to unit RGB directions. The lexicon
/// directions are mutually orthogonal, which makes text-image alignment
/// analytically checkable in tests.
struct MockWorld {
    std::uint64_t seed = 0;
    std::map<std::string, Eigen::Vector3d> lexicon = {
        {"red", {1.0, 0.0, 0.0}},
        {"green", {0.0, 1.0, 0.0}},
        {"blue", {0.0, 0.0, 1.0}},
    };

    /// First lexicon word appearing in a whitespace-split prompt, if any.
    const Eigen::Vector3d* lookup_prompt_color(const std::string& prompt) const;
};

/// Per-backend call counters plus one-shot failure injection, for cache
/// and retry tests. Thread-safe.
class CallStats {
public:
    void bump() const { calls_.fetch_add(1, std::memory_order_relaxed); }
    long calls() const { return calls_.load(std::memory_order_relaxed); }
    void reset() const { calls_.store(0, std::memory_order_relaxed); }

    /// Make the next `n` calls throw BackendError(retryable).
    void fail_next(int n, bool retryable) const {
        fail_retryable_.store(retryable, std::memory_order_relaxed);
        failures_.store(n, std::memory_order_relaxed);
    }
    /// Throws if a failure is armed; called by the owning backend.
    void maybe_fail(const char* who) const;

private:
    mutable std::atomic<long> calls_{0};
    mutable std::atomic<int> failures_{0};
    mutable std::atomic<bool> fail_retryable_{false};
};

/// Deterministic stand-in for the SSL feature extractor. Grid stride is 16
/// pixels; image dims must be multiples of the stride. Attention is the
/// per-patch mean intensity; features are a fixed seeded projection of the
/// patch's (mean RGB, normalized grid position, 1).
class MockFeatureBackend : public FeatureBackend {
public:
    explicit MockFeatureBackend(const MockWorld& world, Index feature_dim = 64);

    BackendCapability capability() const override;
    std::string identifier() const override { return "mock-feature"; }
    std::string checksum() const override;

    const CallStats& stats() const { return stats_; }

private:
    std::pair<FeatureMap, AttentionMap> extract_impl(
        const ImageBuffer& image) const override;

    const MockWorld* world_;
    Index feature_dim_;
    MatX<double> projection_;  // feature_dim × 6
    CallStats stats_;
};

/// Deterministic stand-in for the joint text-image scorer. Image embeddings
/// lift mean RGB onto three reserved orthonormal axes of the embedding
/// space; lexicon words map to exactly those axes, so a pure-color image
/// and its color word embed identically. Unknown words hash to a stable
/// unit vector. Patch tokens lift per-patch mean RGB the same way.
class MockScorerBackend : public ScorerBackend {
public:
    explicit MockScorerBackend(const MockWorld& world, Index embed_dim = 32);

    BackendCapability capability() const override;
    std::string identifier() const override { return "mock-scorer"; }
    std::string checksum() const override;

    const CallStats& image_stats() const { return image_stats_; }
    const CallStats& text_stats() const { return text_stats_; }
    const CallStats& token_stats() const { return token_stats_; }

private:
    EmbeddingVector embed_image_impl(const ImageBuffer& image) const override;
    EmbeddingVector embed_text_impl(const std::string& text) const override;
    MatX<double> patch_tokens_impl(const ImageBuffer& image) const override;

    EmbeddingVector lift_rgb(const Eigen::Vector3d& rgb) const;

    const MockWorld* world_;
    Index embed_dim_;
    CallStats image_stats_, text_stats_, token_stats_;
};

/// Deterministic stand-in for the mask-conditioned editor: masked pixels
/// become the prompt's lexicon color (or a stable hashed color for unknown
/// prompts) plus seeded texture of amplitude 0.005; unmasked pixels are
/// copied bit-exactly.
class MockEditorBackend : public EditorBackend {
public:
    explicit MockEditorBackend(const MockWorld& world);

    BackendCapability capability() const override;
    std::string identifier() const override { return "mock-editor"; }
    std::string checksum() const override;

    const CallStats& stats() const { return stats_; }

private:
    ImageBuffer edit_impl(const ImageBuffer& image, const RegionMask& mask,
                          const std::string& prompt,
                          std::uint64_t seed) const override;

    const MockWorld* world_;
    CallStats stats_;
};

/// Conformance stub for a token-grid (MaskGIT-style) editor that only
/// accepts solid rectangular masks aligned to its token stride. It
/// validates the mask shape, then reports itself unavailable; a full
/// adapter is out of scope (see docs/adapters.md).
class BoxTokenEditorStub : public EditorBackend {
public:
    explicit BoxTokenEditorStub(Index token_stride = 16) : stride_(token_stride) {}

    BackendCapability capability() const override;
    std::string identifier() const override { return "maskgit-stub"; }
    std::string checksum() const override { return "unavailable"; }

private:
    ImageBuffer edit_impl(const ImageBuffer& image, const RegionMask& mask,
                          const std::string& prompt,
                          std::uint64_t seed) const override;

    Index stride_;
};

/// One bundle owning a coherent mock world plus the three backends. The
/// world sits on the heap so the bundle can move without invalidating the
/// backends' world pointers.
struct MockBackends {
    std::unique_ptr<MockWorld> world;
    std::unique_ptr<MockFeatureBackend> features;
    std::unique_ptr<MockScorerBackend> scorer;
    std::unique_ptr<MockEditorBackend> editor;

    BackendSet set() const { return {features.get(), scorer.get(), editor.get()}; }
};

MockBackends make_mock_backends(std::uint64_t seed, Index feature_dim = 64,
                                Index embed_dim = 32);

}  // namespace regionedit
