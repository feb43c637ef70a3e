#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "regionedit/geometry.hpp"
#include "regionedit/types.hpp"

namespace regionedit {

template <typename S>
Eigen::Vector3d mean_rgb(const ImageBufferT<S>& img) {
    return {img.plane[0].template cast<double>().mean(),
            img.plane[1].template cast<double>().mean(),
            img.plane[2].template cast<double>().mean()};
}

/// Mean RGB over mask == 1 pixels; zero vector for an empty mask.
template <typename S>
Eigen::Vector3d mean_rgb(const ImageBufferT<S>& img, const RegionMask& mask) {
    const Index n = mask.ones_count();
    if (n == 0) return Eigen::Vector3d::Zero();
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    for (Index y = 0; y < img.height(); ++y)
        for (Index x = 0; x < img.width(); ++x)
            if (mask.data(y, x))
                for (int c = 0; c < 3; ++c)
                    sum(c) += static_cast<double>(img.plane[c](y, x));
    return sum / static_cast<double>(n);
}

/// Float-to-8-bit conversion, round half up after clamping to [0,1].
template <typename S>
std::uint8_t to_8bit(S v) {
    const double clamped = std::clamp(static_cast<double>(v), 0.0, 1.0);
    return static_cast<std::uint8_t>(std::floor(clamped * 255.0 + 0.5));
}

inline double from_8bit(std::uint8_t v) { return static_cast<double>(v) / 255.0; }

template <typename S>
void fill_rect(ImageBufferT<S>& img, const PixelRect& r, S red, S green, S blue) {
    img.plane[0].block(r.y0, r.x0, r.rows(), r.cols()).setConstant(red);
    img.plane[1].block(r.y0, r.x0, r.rows(), r.cols()).setConstant(green);
    img.plane[2].block(r.y0, r.x0, r.rows(), r.cols()).setConstant(blue);
}

/// One-pixel rectangle outline, clipped to the image.
template <typename S>
void draw_rect_outline(ImageBufferT<S>& img, const PixelRect& r, S red, S green,
                       S blue) {
    const Index y0 = std::clamp<Index>(r.y0, 0, img.height() - 1);
    const Index y1 = std::clamp<Index>(r.y1, 0, img.height() - 1);
    const Index x0 = std::clamp<Index>(r.x0, 0, img.width() - 1);
    const Index x1 = std::clamp<Index>(r.x1, 0, img.width() - 1);
    const S color[3] = {red, green, blue};
    for (Index x = x0; x <= x1; ++x)
        for (int c = 0; c < 3; ++c) {
            img.plane[c](y0, x) = color[c];
            img.plane[c](y1, x) = color[c];
        }
    for (Index y = y0; y <= y1; ++y)
        for (int c = 0; c < 3; ++c) {
            img.plane[c](y, x0) = color[c];
            img.plane[c](y, x1) = color[c];
        }
}

}  // namespace regionedit
