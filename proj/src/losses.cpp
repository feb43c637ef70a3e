#include "regionedit/losses.hpp"

#include <stdexcept>

namespace regionedit {

MatX<double> self_similarity(const MatX<double>& tokens) {
    const Index n = tokens.rows();
    if (n < 2) throw std::invalid_argument("self_similarity: need at least 2 tokens");
    // Normalized rows turn the pairwise cosines into one GEMM; degenerate
    // rows stay zero, giving them similarity 0 with everything.
    MatX<double> unit = MatX<double>::Zero(n, tokens.cols());
    for (Index i = 0; i < n; ++i) {
        const double norm = tokens.row(i).norm();
        if (norm >= kDegenerateNormEps) unit.row(i) = tokens.row(i) / norm;
    }
    return unit * unit.transpose();
}

double clip_loss(const ScorerBackend& scorer, const ImageBuffer& edited,
                 const PromptSpec& prompt) {
    return cosine_distance(scorer.embed_image(edited), scorer.embed_text(prompt.prompt));
}

double structural_loss(const ScorerBackend& scorer, const ImageBuffer& edited,
                       const ImageBuffer& source) {
    const MatX<double> tokens_edited = scorer.patch_tokens(edited);
    const MatX<double> tokens_source = scorer.patch_tokens(source);
    if (tokens_edited.rows() != tokens_source.rows())
        throw std::invalid_argument("structural_loss: token count mismatch");
    return (self_similarity(tokens_edited) - self_similarity(tokens_source)).norm();
}

double directional_loss(const ScorerBackend& scorer, const ImageBuffer& source,
                        const ImageBuffer& edited, const PromptSpec& prompt) {
    const EmbeddingVector ev_edited = scorer.embed_image(edited);
    const EmbeddingVector ev_source = scorer.embed_image(source);
    const EmbeddingVector et_prompt = scorer.embed_text(prompt.prompt);
    const EmbeddingVector et_roi = scorer.embed_text(prompt.resolved_roi_text());
    const VecX<double> image_dir = ev_edited.data - ev_source.data;
    const VecX<double> text_dir = et_prompt.data - et_roi.data;
    return cosine_distance(image_dir, text_dir);
}

LossBreakdown composite_loss(const LossWeights& weights, double clip,
                             double structural, double directional) {
    if (!std::isfinite(clip) || !std::isfinite(structural) || !std::isfinite(directional))
        throw std::invalid_argument("composite_loss: non-finite part");
    LossBreakdown b;
    b.clip = clip;
    b.structural = structural;
    b.directional = directional;
    b.total = weights.lambda_clip * clip + weights.lambda_str * structural +
              weights.lambda_dir * directional;
    return b;
}

LossBreakdown evaluate_losses(const ScorerBackend& scorer, const ImageBuffer& source,
                              const ImageBuffer& edited, const PromptSpec& prompt,
                              const LossWeights& weights) {
    return composite_loss(weights, clip_loss(scorer, edited, prompt),
                          structural_loss(scorer, edited, source),
                          directional_loss(scorer, source, edited, prompt));
}

QualityScore quality_score(const ScorerBackend& scorer, const ImageBuffer& source,
                           const ImageBuffer& edited, const PromptSpec& prompt,
                           double alpha, double beta) {
    const EmbeddingVector ev_source = scorer.embed_image(source);
    const EmbeddingVector ev_edited = scorer.embed_image(edited);
    const EmbeddingVector et_prompt = scorer.embed_text(prompt.prompt);
    QualityScore q;
    q.alpha = alpha;
    q.beta = beta;
    q.s_t2i = cosine_similarity(et_prompt, ev_edited);
    q.s_i2i = cosine_similarity(ev_source, ev_edited);
    q.s = alpha * q.s_t2i + beta * q.s_i2i;
    q.degenerate = ev_source.degenerate || ev_edited.degenerate || et_prompt.degenerate;
    return q;
}

}  // namespace regionedit
