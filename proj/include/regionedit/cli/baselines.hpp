#pragma once

#include "regionedit/backend.hpp"
#include "regionedit/rng.hpp"
#include "regionedit/types.hpp"

namespace regionedit::cli {

/// One baseline box draw with the raw pixel-space samples kept for
/// statistical tests. The resulting grid box carries size_index 0 because
/// it never came from the proposal ladder.
struct BaselineDraw {
    Index center_y = 0, center_x = 0;  // uniform over image pixels
    Index box_h = 0, box_w = 0;        // uniform over [1, H] and [1, W]
    BoxProposal box;                   // grid units, clamped
};

/// Random-anchor-random-size: center uniform over the image, each side
/// uniform over the image dims, clamped at the borders (the box may be
/// non-square). Zero-area draws are resampled.
BaselineDraw baseline_random_random(const ImageBuffer& image, Index stride,
                                    SplitMix64& rng);

/// DINO-anchor-random-size: anchors come from the attention top-K exactly
/// as the learned method's do; only the size is random. Returns the box for
/// one given anchor.
BaselineDraw baseline_dino_random(const ImageBuffer& image, const Anchor& anchor,
                                  Index stride, SplitMix64& rng);

}  // namespace regionedit::cli
