#pragma once

#include <optional>
#include <string>

#include "regionedit/backend.hpp"
#include "regionedit/similarity.hpp"
#include "regionedit/types.hpp"

namespace regionedit {

/// Neutral phrase used for the region-of-interest text when the caller
/// supplies none.
inline constexpr const char* kDefaultRoiText = "a photo";

inline constexpr double kDefaultAlpha = 2.0;
inline constexpr double kDefaultBeta = 1.0;

struct LossWeights {
    double lambda_clip = 1.0;
    double lambda_str = 1.0;
    double lambda_dir = 1.0;
};

struct LossBreakdown {
    double clip = 0.0;
    double structural = 0.0;
    double directional = 0.0;
    double total = 0.0;
};

struct PromptSpec {
    std::string prompt;
    std::optional<std::string> roi_text;

    std::string resolved_roi_text() const { return roi_text.value_or(kDefaultRoiText); }
    bool roi_text_defaulted() const { return !roi_text.has_value(); }
};

struct QualityScore {
    double s_t2i = 0.0;
    double s_i2i = 0.0;
    double alpha = kDefaultAlpha;
    double beta = kDefaultBeta;
    double s = 0.0;
    bool degenerate = false;  // some embedding had no direction; 0 was used
};

/// Pairwise cosine similarity of token rows: Q(i, k) = cos(tokens_i, tokens_k).
MatX<double> self_similarity(const MatX<double>& tokens);

/// Alignment of the edited image with the prompt: D_cos(E_v(Xo), E_t(T)).
double clip_loss(const ScorerBackend& scorer, const ImageBuffer& edited,
                 const PromptSpec& prompt);

/// Structure preservation: ‖Q(f_Xo) − Q(f_X)‖_F over patch tokens.
double structural_loss(const ScorerBackend& scorer, const ImageBuffer& edited,
                       const ImageBuffer& source);

/// Edit direction agreement:
/// D_cos(E_v(Xo) − E_v(X), E_t(T) − E_t(T_roi)).
double directional_loss(const ScorerBackend& scorer, const ImageBuffer& source,
                        const ImageBuffer& edited, const PromptSpec& prompt);

/// λ-weighted combination of precomputed parts.
LossBreakdown composite_loss(const LossWeights& weights, double clip,
                             double structural, double directional);

/// All three parts from the backends, combined.
LossBreakdown evaluate_losses(const ScorerBackend& scorer, const ImageBuffer& source,
                              const ImageBuffer& edited, const PromptSpec& prompt,
                              const LossWeights& weights);

/// Inference ranking score s = α·s_t2i + β·s_i2i with
/// s_t2i = cos(E_t(T), E_v(Xo)) and s_i2i = cos(E_v(X), E_v(Xo)).
QualityScore quality_score(const ScorerBackend& scorer, const ImageBuffer& source,
                           const ImageBuffer& edited, const PromptSpec& prompt,
                           double alpha = kDefaultAlpha, double beta = kDefaultBeta);

}  // namespace regionedit
