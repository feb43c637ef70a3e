#include <doctest.h>

#include <cmath>

#include "regionedit/losses.hpp"
#include "regionedit/mock_backends.hpp"
#include "regionedit/rng.hpp"
#include "testutil/oracles.hpp"

using namespace regionedit;

namespace {

ImageBuffer random_image(SplitMix64& rng, Index h, Index w) {
    ImageBuffer img(h, w);
    for (auto& p : img.plane)
        for (Index r = 0; r < h; ++r)
            for (Index c = 0; c < w; ++c) p(r, c) = rng.next_unit();
    return img;
}

}  // namespace

TEST_SUITE("losses") {

TEST_CASE("structural loss of an image against itself is exactly zero") {
    auto mocks = make_mock_backends(21, 8, 16);
    SplitMix64 rng(0x57u);
    for (int trial = 0; trial < 20; ++trial) {
        const ImageBuffer img = random_image(rng, 48, 48);
        CHECK(structural_loss(*mocks.scorer, img, img) == 0.0);
    }
}

TEST_CASE("clip loss stays within the cosine-distance range on fuzzed input") {
    auto mocks = make_mock_backends(22, 8, 16);
    SplitMix64 rng(0xC11Bu);
    const char* prompts[] = {"red", "green", "blue", "a photo",
                             "weathered bronze statue"};
    for (int trial = 0; trial < 1000; ++trial) {
        const Index h = 16 * (1 + static_cast<Index>(rng.next_below(3)));
        const Index w = 16 * (1 + static_cast<Index>(rng.next_below(3)));
        ImageBuffer img = random_image(rng, h, w);
        if (trial % 7 == 0) {
            // Near-black images exercise the degenerate-embedding path.
            for (auto& p : img.plane) p *= 1e-12;
        }
        PromptSpec prompt{prompts[rng.next_below(5)], std::nullopt};
        const double loss = clip_loss(*mocks.scorer, img, prompt);
        CHECK(loss >= 0.0);
        CHECK(loss <= 2.0);
        CHECK(std::isfinite(loss));
    }
}

TEST_CASE("composite is the lambda-weighted sum of its parts") {
    SplitMix64 rng(0x50Fu);
    for (int trial = 0; trial < 100; ++trial) {
        const double c = rng.next_unit() * 2.0;
        const double s = rng.next_unit() * 10.0;
        const double d = rng.next_unit() * 2.0;
        LossWeights w{rng.next_unit() * 3.0, rng.next_unit() * 3.0,
                      rng.next_unit() * 3.0};
        const LossBreakdown out = composite_loss(w, c, s, d);
        CHECK(out.clip == c);
        CHECK(out.structural == s);
        CHECK(out.directional == d);
        CHECK(out.total ==
              doctest::Approx(w.lambda_clip * c + w.lambda_str * s +
                              w.lambda_dir * d)
                  .epsilon(1e-6));
    }
    const LossBreakdown unit = composite_loss({}, 0.25, 1.5, 0.75);
    CHECK(unit.total == doctest::Approx(0.25 + 1.5 + 0.75).epsilon(1e-12));
}

TEST_CASE("directional loss matches the analytic value on a full repaint") {
    // Source is black (degenerate mean), edited is pure red. The image
    // difference then points along the red axis while the text difference
    // for "red" vs roi "green" points along (1, -1, 0)/sqrt(2), so the
    // cosine is 1/sqrt(2) and the loss 1 - 1/sqrt(2).
    auto mocks = make_mock_backends(23, 8, 16);
    const ImageBuffer black = ImageBuffer::filled(32, 32, 0.0, 0.0, 0.0);
    const ImageBuffer red = ImageBuffer::filled(32, 32, 0.8, 0.0, 0.0);
    PromptSpec prompt{"red", "green"};
    const double loss = directional_loss(*mocks.scorer, black, red, prompt);
    CHECK(loss == doctest::Approx(1.0 - 1.0 / std::sqrt(2.0)).epsilon(1e-9));

    // Matching the roi text direction exactly flips the sign of the text
    // difference, putting the edit maximally off-direction.
    PromptSpec inverted{"green", "red"};
    const double worst = directional_loss(*mocks.scorer, black, red, inverted);
    CHECK(worst == doctest::Approx(1.0 + 1.0 / std::sqrt(2.0)).epsilon(1e-9));

    // No change at all has no direction; the convention scores cosine 0.
    const double flat = directional_loss(*mocks.scorer, red, red, prompt);
    CHECK(flat == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("self-similarity matches the scalar-loop oracle") {
    SplitMix64 rng(0x515u);
    for (int trial = 0; trial < 50; ++trial) {
        const Index n = 2 + static_cast<Index>(rng.next_below(10));
        const Index d = 2 + static_cast<Index>(rng.next_below(6));
        MatX<double> tokens(n, d);
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < d; ++j)
                tokens(i, j) = rng.next_unit() * 2.0 - 1.0;
        if (trial % 4 == 0) tokens.row(0).setZero();  // degenerate row
        const MatX<double> got = self_similarity(tokens);
        const MatX<double> want = testutil::oracle_self_similarity(tokens);
        CHECK((got - want).cwiseAbs().maxCoeff() <= 1e-6);
        // Cosine of a row with itself is 1 unless the row is degenerate.
        for (Index i = 0; i < n; ++i) {
            const bool zero = tokens.row(i).norm() < 1e-8;
            CHECK(got(i, i) == doctest::Approx(zero ? 0.0 : 1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("evaluate_losses equals composing the individual parts") {
    auto mocks = make_mock_backends(24, 8, 16);
    SplitMix64 rng(0xEEu);
    const ImageBuffer source = random_image(rng, 48, 48);
    ImageBuffer edited = source;
    edited.plane[0].block(0, 0, 16, 16).setConstant(0.9);
    const PromptSpec prompt{"red", std::nullopt};
    const LossWeights weights{0.5, 2.0, 1.25};
    const LossBreakdown got =
        evaluate_losses(*mocks.scorer, source, edited, prompt, weights);
    const double c = clip_loss(*mocks.scorer, edited, prompt);
    const double s = structural_loss(*mocks.scorer, edited, source);
    const double d = directional_loss(*mocks.scorer, source, edited, prompt);
    CHECK(got.clip == c);
    CHECK(got.structural == s);
    CHECK(got.directional == d);
    CHECK(got.total == doctest::Approx(0.5 * c + 2.0 * s + 1.25 * d).epsilon(1e-12));
    CHECK(s > 0.0);  // the edit must actually perturb token geometry
}

TEST_CASE("quality score combines alignment and fidelity linearly") {
    auto mocks = make_mock_backends(25, 8, 16);
    const ImageBuffer source = ImageBuffer::filled(32, 32, 0.2, 0.6, 0.2);
    const ImageBuffer edited = ImageBuffer::filled(32, 32, 0.7, 0.1, 0.1);
    const PromptSpec prompt{"red", std::nullopt};
    const QualityScore q = quality_score(*mocks.scorer, source, edited, prompt);
    const auto et = mocks.scorer->embed_text("red");
    const auto ex = mocks.scorer->embed_image(source);
    const auto eo = mocks.scorer->embed_image(edited);
    CHECK(q.s_t2i == doctest::Approx(et.data.dot(eo.data)).epsilon(1e-12));
    CHECK(q.s_i2i == doctest::Approx(ex.data.dot(eo.data)).epsilon(1e-12));
    CHECK(q.alpha == 2.0);
    CHECK(q.beta == 1.0);
    CHECK(q.s == doctest::Approx(2.0 * q.s_t2i + q.s_i2i).epsilon(1e-12));
    CHECK_FALSE(q.degenerate);

    const ImageBuffer black = ImageBuffer::filled(32, 32, 0.0, 0.0, 0.0);
    const QualityScore qd = quality_score(*mocks.scorer, source, black, prompt);
    CHECK(qd.degenerate);
    CHECK(qd.s_t2i == 0.0);

    const QualityScore custom =
        quality_score(*mocks.scorer, source, edited, prompt, 3.0, 0.5);
    CHECK(custom.s ==
          doctest::Approx(3.0 * custom.s_t2i + 0.5 * custom.s_i2i).epsilon(1e-12));
}

TEST_CASE("roi text defaults to the neutral phrase only when absent") {
    PromptSpec with{"red", "green"};
    CHECK_FALSE(with.roi_text_defaulted());
    CHECK(with.resolved_roi_text() == "green");
    PromptSpec without{"red", std::nullopt};
    CHECK(without.roi_text_defaulted());
    CHECK(without.resolved_roi_text() == kDefaultRoiText);
}

}  // TEST_SUITE
