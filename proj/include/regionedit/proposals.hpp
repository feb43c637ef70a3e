#pragma once

#include <stdexcept>
#include <vector>

#include "regionedit/types.hpp"

namespace regionedit {

struct ProposalConfig {
    int M = 7;
    Index scale_step = 1;
};

inline void validate_proposal_config(const ProposalConfig& config, Index grid_h,
                                     Index grid_w) {
    if (config.M < 1 || config.scale_step < 1)
        throw std::invalid_argument("ProposalConfig: M and scale_step must be >= 1");
    if (static_cast<Index>(config.M) * config.scale_step > 2 * std::min(grid_h, grid_w))
        throw std::invalid_argument(
            "ProposalConfig: M*scale_step exceeds twice the short grid side");
}

/// The per-anchor proposal ladder: sizes j = 1..M, each a square of nominal
/// side j*scale_step patches centered at the anchor, clamped to the grid.
/// All M boxes are returned even when clamping makes some rects equal.
inline std::vector<BoxProposal> make_proposals(const Anchor& anchor,
                                               const ProposalConfig& config,
                                               Index grid_h, Index grid_w) {
    validate_proposal_config(config, grid_h, grid_w);
    std::vector<BoxProposal> boxes;
    boxes.reserve(static_cast<std::size_t>(config.M));
    for (int j = 1; j <= config.M; ++j)
        boxes.emplace_back(anchor, j, config.scale_step, grid_h, grid_w);
    return boxes;
}

}  // namespace regionedit
