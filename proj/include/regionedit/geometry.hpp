#pragma once

#include <algorithm>
#include <stdexcept>

#include "regionedit/types.hpp"

namespace regionedit {

/// Inclusive pixel rectangle.
struct PixelRect {
    Index y0 = 0, x0 = 0, y1 = 0, x1 = 0;

    Index rows() const { return y1 - y0 + 1; }
    Index cols() const { return x1 - x0 + 1; }
};

inline Index ceil_div(Index a, Index b) { return (a + b - 1) / b; }

/// Pixel footprint of a grid box at the given patch stride, clipped to the
/// image. Pixel (y, x) belongs to grid cell (y/stride, x/stride).
inline PixelRect pixel_bounds(const BoxProposal& box, Index stride,
                              Index height, Index width) {
    PixelRect r;
    r.y0 = box.r0 * stride;
    r.x0 = box.c0 * stride;
    r.y1 = std::min((box.r1 + 1) * stride - 1, height - 1);
    r.x1 = std::min((box.c1 + 1) * stride - 1, width - 1);
    return r;
}

/// Nearest-patch rasterization of a grid box to an H×W binary mask.
/// The box must fit in the grid the image implies at this stride
/// (ceil(H/stride) × ceil(W/stride)); edge rows/cols may be partial.
inline RegionMask rasterize_mask(const BoxProposal& box, Index stride,
                                 Index height, Index width) {
    if (stride < 1)
        throw std::invalid_argument("rasterize_mask: stride must be >= 1");
    if (height < 1 || width < 1)
        throw std::invalid_argument("rasterize_mask: empty image");
    const Index gh = ceil_div(height, stride);
    const Index gw = ceil_div(width, stride);
    if (box.r0 < 0 || box.c0 < 0 || box.r1 >= gh || box.c1 >= gw ||
        box.r1 < box.r0 || box.c1 < box.c0)
        throw std::invalid_argument("rasterize_mask: box rect outside the grid implied by image size and stride");
    RegionMask mask;
    mask.data.setZero(height, width);
    const PixelRect p = pixel_bounds(box, stride, height, width);
    mask.data.block(p.y0, p.x0, p.rows(), p.cols()).setConstant(1);
    return mask;
}

}  // namespace regionedit
