#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "regionedit/rng.hpp"
#include "regionedit/similarity.hpp"
#include "regionedit/types.hpp"

namespace regionedit {

/// One straight-through draw: argmax(π + g) forward, softmax(π + g) for
/// the backward path. j_star is the 1-based size index, matching
/// BoxProposal::size_index.
struct SelectionSample {
    VecX<double> logits;
    VecX<double> gumbel;
    VecX<double> soft_weights;
    int j_star = 0;
};

inline double gumbel_from_uniform(double u) { return -std::log(-std::log(u)); }

/// Builds the sample from externally supplied noise (tests force g = 0).
inline SelectionSample selection_from_noise(const VecX<double>& logits,
                                            const VecX<double>& gumbel) {
    if (logits.size() == 0 || logits.size() != gumbel.size())
        throw std::invalid_argument("selection_from_noise: size mismatch");
    if (!logits.allFinite() || !gumbel.allFinite())
        throw std::invalid_argument("selection_from_noise: non-finite input");
    SelectionSample s;
    s.logits = logits;
    s.gumbel = gumbel;
    VecX<double> z = logits + gumbel;
    s.soft_weights = softmax(z);
    s.j_star = static_cast<int>(argmax_lowest(z)) + 1;
    return s;
}

/// Seeded Gumbel-Softmax draw: u_j ~ U(0,1), g_j = −log(−log u_j). Exact
/// zeros of the uniform stream are resampled so the noise stays finite.
inline SelectionSample sample_gumbel_selection(const VecX<double>& logits,
                                               std::uint64_t rng_seed) {
    SplitMix64 rng(rng_seed);
    VecX<double> g(logits.size());
    for (Index j = 0; j < logits.size(); ++j) {
        double u = rng.next_unit();
        while (u <= 0.0) u = rng.next_unit();
        g(j) = gumbel_from_uniform(u);
    }
    return selection_from_noise(logits, g);
}

/// Surrogate objective Σ_j w_j·ℓ̂_j with the losses detached.
inline double surrogate_value(const SelectionSample& s, const VecX<double>& losses) {
    if (losses.size() != s.soft_weights.size())
        throw std::invalid_argument("surrogate_value: loss vector size mismatch");
    return s.soft_weights.dot(losses);
}

/// ∂(Σ_j w_j·ℓ̂_j)/∂π through the softmax path:
/// grad_k = w_k·(ℓ̂_k − Σ_j w_j·ℓ̂_j).
inline VecX<double> surrogate_grad_logits(const SelectionSample& s,
                                          const VecX<double>& losses) {
    const double value = surrogate_value(s, losses);
    return s.soft_weights.array() * (losses.array() - value);
}

}  // namespace regionedit
