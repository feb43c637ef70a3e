#include "regionedit/cli/overlays.hpp"

#include "regionedit/geometry.hpp"
#include "regionedit/image_ops.hpp"

namespace regionedit::cli {

ImageBuffer heatmap_image(const AttentionMap& attn, Index height, Index width) {
    const double peak = attn.scores.maxCoeff();
    const Index gh = attn.grid_h();
    const Index gw = attn.grid_w();
    ImageBuffer img(height, width);
    for (Index y = 0; y < height; ++y)
        for (Index x = 0; x < width; ++x) {
            const Index r = std::min(y * gh / height, gh - 1);
            const Index c = std::min(x * gw / width, gw - 1);
            const double v = peak > 0.0 ? attn.scores(r, c) / peak : 0.0;
            for (int ch = 0; ch < 3; ++ch) img.plane[ch](y, x) = v;
        }
    return img;
}

ImageBuffer proposals_overlay(const ImageBuffer& source,
                              const std::vector<BoxProposal>& proposals,
                              Index stride) {
    ImageBuffer img = source;
    const int count = static_cast<int>(proposals.size());
    for (int i = 0; i < count; ++i) {
        const double level =
            count > 1 ? 0.4 + 0.6 * static_cast<double>(i) / (count - 1) : 1.0;
        draw_rect_outline(img,
                          pixel_bounds(proposals[static_cast<std::size_t>(i)], stride,
                                       img.height(), img.width()),
                          level, level, 0.0);
    }
    return img;
}

ImageBuffer selection_overlay(const ImageBuffer& source,
                              const std::vector<EditCandidate>& candidates,
                              Index winner_index, Index stride) {
    ImageBuffer img = source;
    for (const EditCandidate& c : candidates) {
        if (c.failed) continue;
        const bool is_winner = c.anchor_index == winner_index;
        draw_rect_outline(img,
                          pixel_bounds(c.box, stride, img.height(), img.width()),
                          is_winner ? 1.0 : 1.0, is_winner ? 0.0 : 1.0, 0.0);
    }
    return img;
}

ImageBuffer candidate_panel(const EditCandidate& candidate, Index stride) {
    ImageBuffer img = candidate.edited;
    draw_rect_outline(img, pixel_bounds(candidate.box, stride, img.height(), img.width()),
                      1.0, 0.0, 0.0);
    return img;
}

}  // namespace regionedit::cli
