#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "regionedit/types.hpp"

namespace regionedit {

struct AnchorConfig {
    Index K = 8;
};

/// The K highest-attention grid cells, sorted by descending score; ties
/// break toward the smaller row-major index, so iteration order can never
/// change the result.
template <typename S>
std::vector<Anchor> select_anchors(const AttentionMapT<S>& attn,
                                   const AnchorConfig& config) {
    const Index h = attn.grid_h();
    const Index w = attn.grid_w();
    if (h < 1 || w < 1)
        throw std::invalid_argument("select_anchors: empty attention map");
    if (config.K < 1 || config.K > h * w)
        throw std::invalid_argument("select_anchors: K must be in [1, h*w]");
    std::vector<Index> order(static_cast<std::size_t>(h * w));
    for (Index i = 0; i < h * w; ++i) order[static_cast<std::size_t>(i)] = i;
    auto better = [&](Index a, Index b) {
        const S sa = attn.scores(a / w, a % w);
        const S sb = attn.scores(b / w, b % w);
        if (sa != sb) return sa > sb;
        return a < b;
    };
    std::partial_sort(order.begin(), order.begin() + config.K, order.end(), better);
    std::vector<Anchor> anchors;
    anchors.reserve(static_cast<std::size_t>(config.K));
    for (Index i = 0; i < config.K; ++i) {
        const Index idx = order[static_cast<std::size_t>(i)];
        anchors.push_back({idx / w, idx % w,
                           static_cast<double>(attn.scores(idx / w, idx % w))});
    }
    return anchors;
}

}  // namespace regionedit
