#include "regionedit/cli/baselines.hpp"

#include <algorithm>

namespace regionedit::cli {
namespace {

/// Pixel box centered at (cy, cx), clamped, then mapped to the grid cells
/// it touches.
BoxProposal to_grid_box(Index cy, Index cx, Index box_h, Index box_w, Index height,
                        Index width, Index stride) {
    Index y0 = std::max<Index>(cy - box_h / 2, 0);
    Index x0 = std::max<Index>(cx - box_w / 2, 0);
    Index y1 = std::min<Index>(y0 + box_h - 1, height - 1);
    Index x1 = std::min<Index>(x0 + box_w - 1, width - 1);
    const Index grid_h = (height + stride - 1) / stride;
    const Index grid_w = (width + stride - 1) / stride;
    Anchor anchor{std::min(cy / stride, grid_h - 1), std::min(cx / stride, grid_w - 1),
                  0.0};
    return BoxProposal::from_rect(anchor, y0 / stride, x0 / stride,
                                  std::min(y1 / stride, grid_h - 1),
                                  std::min(x1 / stride, grid_w - 1), grid_h, grid_w);
}

}  // namespace

BaselineDraw baseline_random_random(const ImageBuffer& image, Index stride,
                                    SplitMix64& rng) {
    const Index height = image.height();
    const Index width = image.width();
    BaselineDraw d;
    do {
        d.center_y = static_cast<Index>(rng.next_below(static_cast<std::uint64_t>(height)));
        d.center_x = static_cast<Index>(rng.next_below(static_cast<std::uint64_t>(width)));
        d.box_h = static_cast<Index>(rng.next_below(static_cast<std::uint64_t>(height) + 1));
        d.box_w = static_cast<Index>(rng.next_below(static_cast<std::uint64_t>(width) + 1));
    } while (d.box_h == 0 || d.box_w == 0);
    d.box = to_grid_box(d.center_y, d.center_x, d.box_h, d.box_w, height, width, stride);
    return d;
}

BaselineDraw baseline_dino_random(const ImageBuffer& image, const Anchor& anchor,
                                  Index stride, SplitMix64& rng) {
    const Index height = image.height();
    const Index width = image.width();
    BaselineDraw d;
    d.center_y = std::min(anchor.row * stride + stride / 2, height - 1);
    d.center_x = std::min(anchor.col * stride + stride / 2, width - 1);
    do {
        d.box_h = static_cast<Index>(rng.next_below(static_cast<std::uint64_t>(height) + 1));
        d.box_w = static_cast<Index>(rng.next_below(static_cast<std::uint64_t>(width) + 1));
    } while (d.box_h == 0 || d.box_w == 0);
    d.box = to_grid_box(d.center_y, d.center_x, d.box_h, d.box_w, height, width, stride);
    d.box.anchor = anchor;
    return d;
}

}  // namespace regionedit::cli
