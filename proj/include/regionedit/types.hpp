#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <stdexcept>

#include <Eigen/Dense>

namespace regionedit {

using Index = Eigen::Index;

template <typename S>
using MatX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using VecX = Eigen::Matrix<S, Eigen::Dynamic, 1>;

/// H×W×3 image, values in [0,1], stored as three H×W planes (R, G, B).
template <typename S>
struct ImageBufferT {
    std::array<MatX<S>, 3> plane;

    ImageBufferT() = default;
    ImageBufferT(Index height, Index width) {
        for (auto& p : plane) p = MatX<S>::Zero(height, width);
    }

    Index height() const { return plane[0].rows(); }
    Index width() const { return plane[0].cols(); }

    static ImageBufferT filled(Index height, Index width, S r, S g, S b) {
        ImageBufferT img(height, width);
        img.plane[0].setConstant(r);
        img.plane[1].setConstant(g);
        img.plane[2].setConstant(b);
        return img;
    }
};

template <typename S>
bool is_valid_image(const ImageBufferT<S>& img) {
    if (img.height() <= 0 || img.width() <= 0) return false;
    for (const auto& p : img.plane) {
        if (p.rows() != img.height() || p.cols() != img.width()) return false;
        if (!p.allFinite()) return false;
        if (p.minCoeff() < S(0) || p.maxCoeff() > S(1)) return false;
    }
    return true;
}

template <typename S>
void validate_image(const ImageBufferT<S>& img, const char* what = "image") {
    if (!is_valid_image(img))
        throw std::invalid_argument(std::string(what) +
                                    ": expected finite H×W×3 values in [0,1]");
}

/// d×h×w patch-feature grid. Stored as a d×(h·w) matrix whose column
/// r·w + c is the feature of grid cell (r, c); column layout keeps pooling
/// and the network's im2col as plain Eigen products.
template <typename S>
struct FeatureMapT {
    MatX<S> data;
    Index grid_h = 0;
    Index grid_w = 0;

    Index channels() const { return data.rows(); }
    Index cells() const { return grid_h * grid_w; }

    auto cell(Index r, Index c) const { return data.col(r * grid_w + c); }
    auto cell(Index r, Index c) { return data.col(r * grid_w + c); }

    static FeatureMapT zeros(Index d, Index h, Index w) {
        return {MatX<S>::Zero(d, h * w), h, w};
    }
};

template <typename S>
bool is_valid_feature_map(const FeatureMapT<S>& f) {
    return f.channels() > 0 && f.grid_h > 0 && f.grid_w > 0 &&
           f.data.cols() == f.cells() && f.data.allFinite();
}

/// h×w nonnegative attention scores over the same grid as a FeatureMap.
template <typename S>
struct AttentionMapT {
    MatX<S> scores;

    Index grid_h() const { return scores.rows(); }
    Index grid_w() const { return scores.cols(); }
};

template <typename S>
bool is_valid_attention_map(const AttentionMapT<S>& a) {
    return a.grid_h() > 0 && a.grid_w() > 0 && a.scores.allFinite() &&
           a.scores.minCoeff() >= S(0);
}

/// One selected grid cell with its attention score.
struct Anchor {
    Index row = 0;
    Index col = 0;
    double score = 0.0;
};

/// Square candidate edit region, grid units, inclusive rect after clamping.
/// size_index is 1..M for learned proposals; 0 marks a freeform baseline
/// rect that never came from the proposal ladder.
struct BoxProposal {
    Anchor anchor;
    int size_index = 0;
    Index r0 = 0, c0 = 0, r1 = 0, c1 = 0;

    BoxProposal() = default;

    /// Nominal side j·scale_step centered at the anchor (even sides bias
    /// low/left by half a patch), clamped to the grid.
    BoxProposal(const Anchor& a, int j, Index scale_step, Index grid_h,
                Index grid_w)
        : anchor(a), size_index(j) {
        if (j < 1 || scale_step < 1)
            throw std::invalid_argument("BoxProposal: size index and scale_step must be >= 1");
        if (grid_h < 1 || grid_w < 1 || a.row < 0 || a.row >= grid_h ||
            a.col < 0 || a.col >= grid_w)
            throw std::invalid_argument("BoxProposal: anchor outside grid");
        const Index side = static_cast<Index>(j) * scale_step;
        r0 = a.row - side / 2;
        c0 = a.col - side / 2;
        r1 = r0 + side - 1;
        c1 = c0 + side - 1;
        r0 = std::max<Index>(r0, 0);
        c0 = std::max<Index>(c0, 0);
        r1 = std::min<Index>(r1, grid_h - 1);
        c1 = std::min<Index>(c1, grid_w - 1);
    }

    static BoxProposal from_rect(const Anchor& a, Index r0, Index c0, Index r1,
                                 Index c1, Index grid_h, Index grid_w) {
        if (r0 < 0 || c0 < 0 || r1 < r0 || c1 < c0 || r1 >= grid_h || c1 >= grid_w)
            throw std::invalid_argument("BoxProposal: rect outside grid");
        BoxProposal b;
        b.anchor = a;
        b.size_index = 0;
        b.r0 = r0;
        b.c0 = c0;
        b.r1 = r1;
        b.c1 = c1;
        return b;
    }

    Index rows() const { return r1 - r0 + 1; }
    Index cols() const { return c1 - c0 + 1; }
    Index area() const { return rows() * cols(); }
};

/// H×W binary mask handed to the editor; 1 = may change, 0 = must not.
struct RegionMask {
    Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> data;

    Index height() const { return data.rows(); }
    Index width() const { return data.cols(); }
    Index ones_count() const {
        return static_cast<Index>(data.template cast<Index>().sum());
    }
    bool empty_mask() const { return ones_count() == 0; }
};

/// Shared-space embedding. A zero vector is only legal when `degenerate`
/// says so (for example the mean-RGB of an all-black image).
template <typename S>
struct EmbeddingVectorT {
    VecX<S> data;
    bool degenerate = false;

    Index dim() const { return data.size(); }
};

using ImageBuffer = ImageBufferT<double>;
using FeatureMap = FeatureMapT<double>;
using AttentionMap = AttentionMapT<double>;
using EmbeddingVector = EmbeddingVectorT<double>;

}  // namespace regionedit
