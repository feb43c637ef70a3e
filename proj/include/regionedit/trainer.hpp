#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "regionedit/adam.hpp"
#include "regionedit/anchors.hpp"
#include "regionedit/backend.hpp"
#include "regionedit/gumbel.hpp"
#include "regionedit/losses.hpp"
#include "regionedit/proposals.hpp"
#include "regionedit/region_network.hpp"

namespace regionedit {

/// How per-proposal losses reach the surrogate. full-eval edits all M
/// proposals every step (exact, M editor calls); sampled-ema edits only
/// the sampled proposal and reads the rest from an EMA table, seeding each
/// anchor's row with one full sweep on first visit.
enum class GradientMode { kFullEval, kSampledEma };

std::string to_string(GradientMode mode);
GradientMode gradient_mode_from_string(const std::string& name);

struct TrainConfig {
    Index K = 8;
    int M = 7;
    Index l = 7;
    Index scale_step = 1;
    int epochs = 5;
    double learning_rate = 0.003;
    int batch_size = 1;
    LossWeights weights;
    double alpha = kDefaultAlpha;
    double beta = kDefaultBeta;
    GradientMode gradient_mode = GradientMode::kFullEval;
    double ema_decay = 0.9;
    int steps_per_epoch = 0;  // 0 means one step per anchor
    std::uint64_t master_seed = 0;
    int editor_retries = 2;
    RegionNetworkShape network_shape;

    int resolved_steps_per_epoch() const {
        return steps_per_epoch > 0 ? steps_per_epoch : static_cast<int>(K);
    }
};

void validate_train_config(const TrainConfig& config);

/// Per-(anchor, proposal) loss estimates for the sampled-ema mode plus
/// bookkeeping of how often each entry was refreshed.
struct LossTable {
    MatX<double> ema;                                       // K × M
    Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic> visits;  // K × M

    static LossTable zeros(Index K, int M) {
        LossTable t;
        t.ema = MatX<double>::Zero(K, M);
        t.visits.setZero(K, M);
        return t;
    }
};

struct TrainStepRecord {
    int epoch = 0;
    Index anchor = 0;  // index into the anchor list
    int j_star = 0;    // 1-based proposal index
    VecX<double> soft_weights;
    LossBreakdown loss_parts;  // of the sampled proposal
    double surrogate = 0.0;
    std::uint64_t seed = 0;  // editor seed of the sampled proposal
    bool skipped = false;
    std::string skip_reason;
};

/// Noiseless softmax of every anchor's logits at the end of an epoch,
/// one row per anchor.
struct EpochSummary {
    int epoch = 0;
    MatX<double> softmax_per_anchor;  // K × M
};

struct TrainingLog {
    std::vector<TrainStepRecord> steps;
    std::vector<EpochSummary> epochs;
};

struct TrainResult {
    RegionGeneratorParams params;
    LossTable loss_table;
    TrainingLog log;
    std::vector<Anchor> anchors;
    Index grid_h = 0, grid_w = 0;
    Index patch_stride = 0;
};

/// Per-sample optimization: for each epoch and each anchor, draw one
/// straight-through Gumbel selection, obtain detached per-proposal losses,
/// and take one Adam step on the surrogate Σ_j w_j·ℓ̂_j. Editor failures
/// retry up to config.editor_retries, then skip the step; if every step
/// skipped, throws BackendError.
TrainResult train_region_generator(const ImageBuffer& image, const PromptSpec& prompt,
                                   const BackendSet& backends,
                                   const TrainConfig& config);

/// One surrogate update on explicit inputs; the building block of the loop
/// above, exposed for gradient tests. Returns the logit gradient it used.
VecX<double> surrogate_step(RegionGeneratorParams& params, AdamOptimizer& optimizer,
                            const MatX<double>& input, const SelectionSample& selection,
                            const VecX<double>& proposal_losses);

struct EditCandidate {
    Index anchor_index = 0;
    Anchor anchor;
    BoxProposal box;
    RegionMask mask;
    ImageBuffer edited;
    LossBreakdown losses;
    QualityScore score;
    std::uint64_t edit_seed = 0;
    bool failed = false;
    std::string failure;
};

struct InferenceResult {
    EditCandidate winner;
    std::vector<EditCandidate> candidates;
    Index winner_index = 0;
};

/// Index of the highest-quality successful candidate; ties resolve to the
/// lowest anchor index. Throws BackendError if every candidate failed.
Index pick_winner(const std::vector<EditCandidate>& candidates);

/// Noise-free inference: per anchor, take the argmax-probability proposal,
/// edit once with a derived seed, and score with the weighted quality
/// score. Failed anchors are kept in the candidate list but never win.
InferenceResult infer_best_edit(const ImageBuffer& image, const PromptSpec& prompt,
                                const RegionGeneratorParams& params,
                                const BackendSet& backends, const TrainConfig& config);

}  // namespace regionedit
