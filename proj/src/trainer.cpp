#include "regionedit/trainer.hpp"

#include <sstream>

#include "regionedit/geometry.hpp"
#include "regionedit/roi_pool.hpp"

namespace regionedit {
namespace {

struct EditOutcome {
    ImageBuffer image;
    bool ok = false;
    std::string error;
};

EditOutcome edit_with_retries(const EditorBackend& editor, const ImageBuffer& image,
                              const RegionMask& mask, const std::string& prompt,
                              std::uint64_t seed, int retries) {
    EditOutcome out;
    for (int attempt = 0; attempt <= retries; ++attempt) {
        try {
            out.image = editor.edit(image, mask, prompt, seed);
            out.ok = true;
            return out;
        } catch (const BackendError& e) {
            out.error = e.what();
            if (!e.retryable()) return out;
        }
    }
    return out;
}

/// The network input of one anchor: its M pooled proposal features,
/// channel-concatenated. Fixed for the whole run because the feature map
/// never changes.
MatX<double> anchor_input(const FeatureMap& fmap,
                          const std::vector<BoxProposal>& proposals, Index l) {
    std::vector<PooledFeature> pooled;
    pooled.reserve(proposals.size());
    for (const auto& box : proposals) pooled.push_back(roi_pool(fmap, box, l));
    return concat_pooled(pooled);
}

}  // namespace

std::string to_string(GradientMode mode) {
    return mode == GradientMode::kFullEval ? "full-eval" : "sampled-ema";
}

GradientMode gradient_mode_from_string(const std::string& name) {
    if (name == "full-eval") return GradientMode::kFullEval;
    if (name == "sampled-ema") return GradientMode::kSampledEma;
    throw std::invalid_argument("unknown gradient mode: " + name +
                                " (expected full-eval or sampled-ema)");
}

void validate_train_config(const TrainConfig& config) {
    if (config.K < 1) throw std::invalid_argument("TrainConfig: K must be >= 1");
    if (config.M < 1) throw std::invalid_argument("TrainConfig: M must be >= 1");
    if (config.l < 1) throw std::invalid_argument("TrainConfig: l must be >= 1");
    if (config.scale_step < 1)
        throw std::invalid_argument("TrainConfig: scale_step must be >= 1");
    if (config.epochs < 0)
        throw std::invalid_argument("TrainConfig: epochs must be >= 0");
    if (!(config.learning_rate > 0.0))
        throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
    if (config.batch_size < 1)
        throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
    if (!(config.ema_decay > 0.0 && config.ema_decay < 1.0))
        throw std::invalid_argument("TrainConfig: ema_decay must be in (0,1)");
    if (config.steps_per_epoch < 0)
        throw std::invalid_argument("TrainConfig: steps_per_epoch must be >= 0");
    if (config.editor_retries < 0)
        throw std::invalid_argument("TrainConfig: editor_retries must be >= 0");
    if (!(config.weights.lambda_clip >= 0.0 && config.weights.lambda_str >= 0.0 &&
          config.weights.lambda_dir >= 0.0))
        throw std::invalid_argument("TrainConfig: loss weights must be >= 0");
}

VecX<double> surrogate_step(RegionGeneratorParams& params, AdamOptimizer& optimizer,
                            const MatX<double>& input, const SelectionSample& selection,
                            const VecX<double>& proposal_losses) {
    const VecX<double> dlogits = surrogate_grad_logits(selection, proposal_losses);
    const RgnActivations acts = rgn_forward_cached(params, input);
    const RegionGeneratorGrads grads = rgn_backward(params, acts, dlogits);
    if (!grads.all_finite())
        throw std::runtime_error("surrogate_step: non-finite gradient");
    optimizer.step(params, grads);
    return dlogits;
}

TrainResult train_region_generator(const ImageBuffer& image, const PromptSpec& prompt,
                                   const BackendSet& backends,
                                   const TrainConfig& config) {
    validate_train_config(config);
    if (!backends.features || !backends.scorer || !backends.editor)
        throw std::invalid_argument("train_region_generator: missing backend");
    if (prompt.prompt.empty())
        throw std::invalid_argument("train_region_generator: empty prompt");

    TrainResult result;
    auto [fmap, attn] = backends.features->extract(image);
    result.grid_h = fmap.grid_h;
    result.grid_w = fmap.grid_w;
    result.patch_stride = backends.features->capability().patch_stride;
    result.anchors = select_anchors(attn, {config.K});

    const ProposalConfig proposal_config{config.M, config.scale_step};
    std::vector<std::vector<BoxProposal>> proposals;
    std::vector<MatX<double>> inputs;
    std::vector<std::vector<RegionMask>> masks;
    proposals.reserve(result.anchors.size());
    for (const Anchor& a : result.anchors) {
        proposals.push_back(make_proposals(a, proposal_config, fmap.grid_h, fmap.grid_w));
        inputs.push_back(anchor_input(fmap, proposals.back(), config.l));
        std::vector<RegionMask> anchor_masks;
        anchor_masks.reserve(proposals.back().size());
        for (const auto& box : proposals.back())
            anchor_masks.push_back(rasterize_mask(box, result.patch_stride,
                                                  image.height(), image.width()));
        masks.push_back(std::move(anchor_masks));
    }

    result.params = make_region_generator_params(
        config.M, fmap.channels(), config.l,
        derive_seed(config.master_seed, "region-generator"), config.network_shape);
    AdamOptimizer optimizer(result.params, {config.learning_rate, 0.9, 0.999, 1e-8});
    result.loss_table = LossTable::zeros(config.K, config.M);

    const int steps_per_epoch = config.resolved_steps_per_epoch();
    long executed = 0;

    auto eval_proposal = [&](Index a, int j, std::uint64_t seed,
                             LossBreakdown& breakdown) -> EditOutcome {
        EditOutcome out = edit_with_retries(*backends.editor, image, masks[a][j - 1],
                                            prompt.prompt, seed, config.editor_retries);
        if (out.ok)
            breakdown = evaluate_losses(*backends.scorer, image, out.image, prompt,
                                        config.weights);
        return out;
    };

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        for (int t = 0; t < steps_per_epoch; ++t) {
            const Index a = static_cast<Index>(t) % config.K;
            const long global_step = static_cast<long>(epoch) * steps_per_epoch + t;
            TrainStepRecord record;
            record.epoch = epoch;
            record.anchor = a;

            const RgnActivations acts = rgn_forward_cached(result.params, inputs[a]);
            const SelectionSample sample = sample_gumbel_selection(
                acts.logits,
                derive_seed(config.master_seed, "gumbel",
                            {static_cast<std::uint64_t>(global_step)}));
            record.j_star = sample.j_star;
            record.soft_weights = sample.soft_weights;
            record.seed = derive_seed(config.master_seed, "edit",
                                      {static_cast<std::uint64_t>(a),
                                       static_cast<std::uint64_t>(global_step),
                                       static_cast<std::uint64_t>(sample.j_star)});

            VecX<double> losses(config.M);
            bool have_losses = true;
            if (config.gradient_mode == GradientMode::kFullEval ||
                result.loss_table.visits.row(a).sum() == 0) {
                for (int j = 1; j <= config.M && have_losses; ++j) {
                    LossBreakdown breakdown;
                    const std::uint64_t seed =
                        derive_seed(config.master_seed, "edit",
                                    {static_cast<std::uint64_t>(a),
                                     static_cast<std::uint64_t>(global_step),
                                     static_cast<std::uint64_t>(j)});
                    EditOutcome out = eval_proposal(a, j, seed, breakdown);
                    if (!out.ok) {
                        have_losses = false;
                        record.skip_reason = out.error;
                        break;
                    }
                    losses(j - 1) = breakdown.total;
                    if (j == sample.j_star) record.loss_parts = breakdown;
                    const double decay =
                        result.loss_table.visits(a, j - 1) == 0 ? 0.0 : config.ema_decay;
                    result.loss_table.ema(a, j - 1) =
                        decay * result.loss_table.ema(a, j - 1) +
                        (1.0 - decay) * breakdown.total;
                    result.loss_table.visits(a, j - 1) += 1;
                }
            } else {
                LossBreakdown breakdown;
                EditOutcome out =
                    eval_proposal(a, sample.j_star, record.seed, breakdown);
                if (!out.ok) {
                    have_losses = false;
                    record.skip_reason = out.error;
                } else {
                    record.loss_parts = breakdown;
                    result.loss_table.ema(a, sample.j_star - 1) =
                        config.ema_decay * result.loss_table.ema(a, sample.j_star - 1) +
                        (1.0 - config.ema_decay) * breakdown.total;
                    result.loss_table.visits(a, sample.j_star - 1) += 1;
                    losses = result.loss_table.ema.row(a).transpose();
                }
            }
            if (config.gradient_mode == GradientMode::kSampledEma && have_losses)
                losses = result.loss_table.ema.row(a).transpose();

            if (!have_losses) {
                record.skipped = true;
                if (record.skip_reason.empty()) record.skip_reason = "editor failure";
                result.log.steps.push_back(std::move(record));
                continue;
            }

            record.surrogate = surrogate_value(sample, losses);
            const VecX<double> dlogits = surrogate_grad_logits(sample, losses);
            const RegionGeneratorGrads grads =
                rgn_backward(result.params, acts, dlogits);
            if (!grads.all_finite()) {
                record.skipped = true;
                record.skip_reason = "non-finite gradient";
                result.log.steps.push_back(std::move(record));
                continue;
            }
            optimizer.step(result.params, grads);
            ++executed;
            result.log.steps.push_back(std::move(record));
        }

        EpochSummary summary;
        summary.epoch = epoch;
        summary.softmax_per_anchor.resize(config.K, config.M);
        for (Index a = 0; a < config.K; ++a)
            summary.softmax_per_anchor.row(a) =
                softmax(rgn_forward_cached(result.params, inputs[a]).logits).transpose();
        result.log.epochs.push_back(std::move(summary));
    }

    const long intended = static_cast<long>(config.epochs) * steps_per_epoch;
    if (intended > 0 && executed == 0)
        throw BackendError("train_region_generator: every training step was skipped",
                           false);
    return result;
}

Index pick_winner(const std::vector<EditCandidate>& candidates) {
    Index best = -1;
    for (Index i = 0; i < static_cast<Index>(candidates.size()); ++i) {
        const auto& c = candidates[static_cast<std::size_t>(i)];
        if (c.failed) continue;
        if (best < 0 || c.score.s > candidates[static_cast<std::size_t>(best)].score.s)
            best = i;
    }
    if (best < 0)
        throw BackendError("pick_winner: every candidate failed", false);
    return best;
}

InferenceResult infer_best_edit(const ImageBuffer& image, const PromptSpec& prompt,
                                const RegionGeneratorParams& params,
                                const BackendSet& backends, const TrainConfig& config) {
    validate_train_config(config);
    if (!backends.features || !backends.scorer || !backends.editor)
        throw std::invalid_argument("infer_best_edit: missing backend");

    auto [fmap, attn] = backends.features->extract(image);
    const Index stride = backends.features->capability().patch_stride;
    const std::vector<Anchor> anchors = select_anchors(attn, {config.K});
    const ProposalConfig proposal_config{config.M, config.scale_step};

    InferenceResult result;
    result.candidates.reserve(anchors.size());
    for (Index a = 0; a < static_cast<Index>(anchors.size()); ++a) {
        EditCandidate c;
        c.anchor_index = a;
        c.anchor = anchors[static_cast<std::size_t>(a)];
        const auto proposals =
            make_proposals(c.anchor, proposal_config, fmap.grid_h, fmap.grid_w);
        const VecX<double> logits =
            rgn_forward_cached(params, anchor_input(fmap, proposals, config.l)).logits;
        const int j = static_cast<int>(argmax_lowest(logits)) + 1;
        c.box = proposals[static_cast<std::size_t>(j - 1)];
        c.mask = rasterize_mask(c.box, stride, image.height(), image.width());
        c.edit_seed = derive_seed(config.master_seed, "infer",
                                  {static_cast<std::uint64_t>(a)});
        EditOutcome out = edit_with_retries(*backends.editor, image, c.mask,
                                            prompt.prompt, c.edit_seed,
                                            config.editor_retries);
        if (!out.ok) {
            c.failed = true;
            c.failure = out.error;
        } else {
            c.edited = std::move(out.image);
            c.losses = evaluate_losses(*backends.scorer, image, c.edited, prompt,
                                       config.weights);
            c.score = quality_score(*backends.scorer, image, c.edited, prompt,
                                    config.alpha, config.beta);
        }
        result.candidates.push_back(std::move(c));
    }
    result.winner_index = pick_winner(result.candidates);
    result.winner = result.candidates[static_cast<std::size_t>(result.winner_index)];
    return result;
}

}  // namespace regionedit
