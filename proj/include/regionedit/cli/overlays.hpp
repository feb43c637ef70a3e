#pragma once

#include <vector>

#include "regionedit/trainer.hpp"
#include "regionedit/types.hpp"

namespace regionedit::cli {

/// Attention rendered as a grayscale image, each grid cell one stride-sized
/// block, normalized by the map maximum.
ImageBuffer heatmap_image(const AttentionMap& attn, Index height, Index width);

/// Source image with every proposal rectangle of one anchor outlined;
/// outline brightness grows with the size index.
ImageBuffer proposals_overlay(const ImageBuffer& source,
                              const std::vector<BoxProposal>& proposals,
                              Index stride);

/// Source image with every candidate's selected region outlined; the
/// winner's outline is red, the others yellow.
ImageBuffer selection_overlay(const ImageBuffer& source,
                              const std::vector<EditCandidate>& candidates,
                              Index winner_index, Index stride);

/// A candidate's edited image with its region outlined.
ImageBuffer candidate_panel(const EditCandidate& candidate, Index stride);

}  // namespace regionedit::cli
