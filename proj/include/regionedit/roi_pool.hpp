#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "regionedit/types.hpp"

namespace regionedit {

/// d×l×l pooled feature for one box, stored d×(l·l) with bin (by, bx) in
/// column by·l + bx.
template <typename S>
struct PooledFeatureT {
    MatX<S> data;
    int size_index = 0;
    Index l = 0;

    Index channels() const { return data.rows(); }
};

using PooledFeature = PooledFeatureT<double>;

/// Bilinear sample of a feature map at a continuous grid point. Cell (r, c)
/// covers [r, r+1)×[c, c+1) with its value at the center (r+0.5, c+0.5);
/// points past the border replicate the edge cells.
template <typename S>
VecX<S> bilinear_sample(const FeatureMapT<S>& f, double y, double x) {
    const Index h = f.grid_h, w = f.grid_w;
    double gy = y - 0.5, gx = x - 0.5;
    Index y0 = static_cast<Index>(std::floor(gy));
    Index x0 = static_cast<Index>(std::floor(gx));
    double ty = gy - static_cast<double>(y0);
    double tx = gx - static_cast<double>(x0);
    if (y0 < 0) { y0 = 0; ty = 0.0; }
    if (y0 >= h - 1) { y0 = h - 1; ty = 0.0; }
    if (x0 < 0) { x0 = 0; tx = 0.0; }
    if (x0 >= w - 1) { x0 = w - 1; tx = 0.0; }
    const Index y1 = std::min(y0 + 1, h - 1);
    const Index x1 = std::min(x0 + 1, w - 1);
    return ((1.0 - ty) * (1.0 - tx)) * f.cell(y0, x0) +
           ((1.0 - ty) * tx) * f.cell(y0, x1) +
           (ty * (1.0 - tx)) * f.cell(y1, x0) +
           (ty * tx) * f.cell(y1, x1);
}

/// ROI-align style pooling: bilinear samples at the centers of an l×l bin
/// grid laid over the box's coverage region [r0, r1+1)×[c0, c1+1).
template <typename S>
PooledFeatureT<S> roi_pool(const FeatureMapT<S>& f, const BoxProposal& box, Index l) {
    if (l < 1) throw std::invalid_argument("roi_pool: l must be >= 1");
    if (!is_valid_feature_map(f))
        throw std::invalid_argument("roi_pool: invalid feature map");
    if (box.r0 < 0 || box.c0 < 0 || box.r1 >= f.grid_h || box.c1 >= f.grid_w)
        throw std::invalid_argument("roi_pool: box rect outside the feature grid");
    Index r1 = std::max(box.r1, box.r0);
    Index c1 = std::max(box.c1, box.c0);
    const double region_h = static_cast<double>(r1 + 1 - box.r0);
    const double region_w = static_cast<double>(c1 + 1 - box.c0);
    PooledFeatureT<S> out;
    out.size_index = box.size_index;
    out.l = l;
    out.data.resize(f.channels(), l * l);
    for (Index by = 0; by < l; ++by)
        for (Index bx = 0; bx < l; ++bx) {
            const double y = static_cast<double>(box.r0) +
                             (static_cast<double>(by) + 0.5) * region_h / static_cast<double>(l);
            const double x = static_cast<double>(box.c0) +
                             (static_cast<double>(bx) + 0.5) * region_w / static_cast<double>(l);
            out.data.col(by * l + bx) = bilinear_sample(f, y, x);
        }
    return out;
}

/// Channel-concatenation of the M pooled features into one (M·d)×(l·l)
/// matrix, the input of the region generation network.
template <typename S>
MatX<S> concat_pooled(const std::vector<PooledFeatureT<S>>& pooled) {
    if (pooled.empty())
        throw std::invalid_argument("concat_pooled: empty proposal list");
    const Index d = pooled.front().channels();
    const Index cols = pooled.front().data.cols();
    MatX<S> stacked(static_cast<Index>(pooled.size()) * d, cols);
    for (std::size_t m = 0; m < pooled.size(); ++m) {
        if (pooled[m].channels() != d || pooled[m].data.cols() != cols)
            throw std::invalid_argument("concat_pooled: inconsistent pooled shapes");
        stacked.middleRows(static_cast<Index>(m) * d, d) = pooled[m].data;
    }
    return stacked;
}

}  // namespace regionedit
