#include "regionedit/mock_backends.hpp"

#include <sstream>

#include "regionedit/rng.hpp"

namespace regionedit {
namespace {

constexpr Index kMockStride = 16;

void require_stride_aligned(const ImageBuffer& image, const char* who) {
    if (image.height() % kMockStride != 0 || image.width() % kMockStride != 0 ||
        image.height() < kMockStride || image.width() < kMockStride) {
        std::ostringstream msg;
        msg << who << ": image dims must be positive multiples of " << kMockStride
            << ", got " << image.height() << "x" << image.width();
        throw std::invalid_argument(msg.str());
    }
}

Eigen::Vector3d patch_mean_rgb(const ImageBuffer& image, Index r, Index c) {
    Eigen::Vector3d m;
    for (int ch = 0; ch < 3; ++ch)
        m(ch) = image.plane[ch]
                    .block(r * kMockStride, c * kMockStride, kMockStride, kMockStride)
                    .mean();
    return m;
}

std::string seed_checksum(const char* role, std::uint64_t seed) {
    std::ostringstream s;
    s << role << "-" << std::hex << hash_str(seed, role);
    return s.str();
}

}  // namespace

const Eigen::Vector3d* MockWorld::lookup_prompt_color(const std::string& prompt) const {
    std::istringstream words(prompt);
    std::string word;
    while (words >> word) {
        auto it = lexicon.find(word);
        if (it != lexicon.end()) return &it->second;
    }
    return nullptr;
}

void CallStats::maybe_fail(const char* who) const {
    int pending = failures_.load(std::memory_order_relaxed);
    while (pending > 0) {
        if (failures_.compare_exchange_weak(pending, pending - 1,
                                            std::memory_order_relaxed))
            throw BackendError(std::string(who) + ": injected failure",
                               fail_retryable_.load(std::memory_order_relaxed));
    }
}

MockFeatureBackend::MockFeatureBackend(const MockWorld& world, Index feature_dim)
    : world_(&world), feature_dim_(feature_dim) {
    if (feature_dim < 1)
        throw std::invalid_argument("MockFeatureBackend: feature_dim must be >= 1");
    SplitMix64 rng(derive_seed(world.seed, "feature-projection"));
    projection_.resize(feature_dim_, 6);
    for (Index i = 0; i < projection_.rows(); ++i)
        for (Index j = 0; j < projection_.cols(); ++j)
            projection_(i, j) = rng.next_in(-1.0, 1.0);
}

BackendCapability MockFeatureBackend::capability() const {
    return {kMockStride, feature_dim_, 0, false};
}

std::string MockFeatureBackend::checksum() const {
    return seed_checksum("mock-feature", world_->seed);
}

std::pair<FeatureMap, AttentionMap> MockFeatureBackend::extract_impl(
    const ImageBuffer& image) const {
    stats_.maybe_fail("mock-feature");
    stats_.bump();
    require_stride_aligned(image, "mock-feature");
    const Index h = image.height() / kMockStride;
    const Index w = image.width() / kMockStride;
    FeatureMap fmap = FeatureMap::zeros(feature_dim_, h, w);
    AttentionMap attn;
    attn.scores.resize(h, w);
    VecX<double> descriptor(6);
    for (Index r = 0; r < h; ++r)
        for (Index c = 0; c < w; ++c) {
            const Eigen::Vector3d rgb = patch_mean_rgb(image, r, c);
            descriptor << rgb(0), rgb(1), rgb(2),
                (static_cast<double>(r) + 0.5) / static_cast<double>(h),
                (static_cast<double>(c) + 0.5) / static_cast<double>(w), 1.0;
            fmap.cell(r, c) = projection_ * descriptor;
            attn.scores(r, c) = rgb.mean();
        }
    return {std::move(fmap), std::move(attn)};
}

MockScorerBackend::MockScorerBackend(const MockWorld& world, Index embed_dim)
    : world_(&world), embed_dim_(embed_dim) {
    if (embed_dim < 4)
        throw std::invalid_argument("MockScorerBackend: embed_dim must be >= 4");
}

BackendCapability MockScorerBackend::capability() const {
    return {kMockStride, 0, embed_dim_, false};
}

std::string MockScorerBackend::checksum() const {
    return seed_checksum("mock-scorer", world_->seed);
}

EmbeddingVector MockScorerBackend::lift_rgb(const Eigen::Vector3d& rgb) const {
    EmbeddingVector e;
    e.data = VecX<double>::Zero(embed_dim_);
    e.data.head<3>() = rgb;
    const double norm = e.data.norm();
    if (norm < kMockLiftEps) {
        e.data.setZero();
        e.degenerate = true;
    } else {
        e.data /= norm;
    }
    return e;
}

EmbeddingVector MockScorerBackend::embed_image_impl(const ImageBuffer& image) const {
    image_stats_.maybe_fail("mock-scorer");
    image_stats_.bump();
    Eigen::Vector3d m;
    for (int ch = 0; ch < 3; ++ch) m(ch) = image.plane[ch].mean();
    return lift_rgb(m);
}

EmbeddingVector MockScorerBackend::embed_text_impl(const std::string& text) const {
    text_stats_.maybe_fail("mock-scorer");
    text_stats_.bump();
    auto it = world_->lexicon.find(text);
    if (it != world_->lexicon.end()) return lift_rgb(it->second);
    SplitMix64 rng(derive_seed(world_->seed, "text-embedding",
                               {hash_str(0x7E27ULL, text)}));
    EmbeddingVector e;
    e.data.resize(embed_dim_);
    for (Index i = 0; i < embed_dim_; ++i) e.data(i) = rng.next_in(-1.0, 1.0);
    e.data.normalize();
    return e;
}

MatX<double> MockScorerBackend::patch_tokens_impl(const ImageBuffer& image) const {
    token_stats_.maybe_fail("mock-scorer");
    token_stats_.bump();
    require_stride_aligned(image, "mock-scorer");
    const Index h = image.height() / kMockStride;
    const Index w = image.width() / kMockStride;
    MatX<double> tokens = MatX<double>::Zero(h * w, embed_dim_);
    for (Index r = 0; r < h; ++r)
        for (Index c = 0; c < w; ++c)
            tokens.row(r * w + c).head<3>() = patch_mean_rgb(image, r, c);
    return tokens;
}

MockEditorBackend::MockEditorBackend(const MockWorld& world) : world_(&world) {}

BackendCapability MockEditorBackend::capability() const { return {0, 0, 0, false}; }

std::string MockEditorBackend::checksum() const {
    return seed_checksum("mock-editor", world_->seed);
}

ImageBuffer MockEditorBackend::edit_impl(const ImageBuffer& image,
                                         const RegionMask& mask,
                                         const std::string& prompt,
                                         std::uint64_t seed) const {
    stats_.maybe_fail("mock-editor");
    stats_.bump();
    Eigen::Vector3d color;
    if (const Eigen::Vector3d* c = world_->lookup_prompt_color(prompt)) {
        color = *c;
    } else {
        SplitMix64 rng(derive_seed(world_->seed, "prompt-color",
                                   {hash_str(0x11C5ULL, prompt)}));
        color = {rng.next_unit(), rng.next_unit(), rng.next_unit()};
    }
    const std::uint64_t call_seed =
        derive_seed(world_->seed, "edit-call", {seed, hash_str(0x11C5ULL, prompt)});
    ImageBuffer out = image;
    for (Index y = 0; y < image.height(); ++y)
        for (Index x = 0; x < image.width(); ++x) {
            if (!mask.data(y, x)) continue;
            SplitMix64 pix(hash_mix(hash_mix(call_seed, static_cast<std::uint64_t>(y)),
                                    static_cast<std::uint64_t>(x)));
            for (int ch = 0; ch < 3; ++ch)
                out.plane[ch](y, x) = std::clamp(
                    color(ch) + kMockTextureAmplitude * (2.0 * pix.next_unit() - 1.0),
                    0.0, 1.0);
        }
    return out;
}

BackendCapability BoxTokenEditorStub::capability() const {
    return {stride_, 0, 0, true};
}

ImageBuffer BoxTokenEditorStub::edit_impl(const ImageBuffer& image,
                                          const RegionMask& mask,
                                          const std::string&, std::uint64_t) const {
    Index y0 = image.height(), y1 = -1, x0 = image.width(), x1 = -1;
    for (Index y = 0; y < mask.height(); ++y)
        for (Index x = 0; x < mask.width(); ++x)
            if (mask.data(y, x)) {
                y0 = std::min(y0, y);
                y1 = std::max(y1, y);
                x0 = std::min(x0, x);
                x1 = std::max(x1, x);
            }
    const Index filled = (y1 - y0 + 1) * (x1 - x0 + 1);
    if (mask.ones_count() != filled)
        throw std::invalid_argument(
            "maskgit-stub: only solid rectangular (box-like) masks are supported");
    if (y0 % stride_ != 0 || x0 % stride_ != 0 ||
        (y1 + 1) % stride_ != 0 || (x1 + 1) % stride_ != 0)
        throw std::invalid_argument(
            "maskgit-stub: mask rectangle must align to the token stride");
    throw BackendError(
        "maskgit-stub: conformance stub, no generative model attached "
        "(see docs/adapters.md)",
        false);
}

MockBackends make_mock_backends(std::uint64_t seed, Index feature_dim,
                                Index embed_dim) {
    MockBackends b;
    b.world = std::make_unique<MockWorld>();
    b.world->seed = seed;
    b.features = std::make_unique<MockFeatureBackend>(*b.world, feature_dim);
    b.scorer = std::make_unique<MockScorerBackend>(*b.world, embed_dim);
    b.editor = std::make_unique<MockEditorBackend>(*b.world);
    return b;
}

}  // namespace regionedit
