#pragma once

#include <string>

#include <json.hpp>

#include "regionedit/backend.hpp"
#include "regionedit/losses.hpp"
#include "regionedit/trainer.hpp"

namespace regionedit {

nlohmann::ordered_json to_json(const Anchor& a);
nlohmann::ordered_json to_json(const BoxProposal& b);
nlohmann::ordered_json to_json(const LossBreakdown& b);
nlohmann::ordered_json to_json(const QualityScore& q);
nlohmann::ordered_json to_json(const BackendCapability& c);

/// Candidate serialization for sidecars; the edited pixels stay in their
/// own PNG, only their dims are recorded here.
nlohmann::ordered_json to_json(const EditCandidate& c);

/// One JSON object per training step:
/// {epoch, anchor, j_star, soft_weights, loss_parts, surrogate, seed}.
/// Skipped steps carry skipped/skip_reason on top.
std::string training_log_jsonl(const TrainingLog& log);

nlohmann::ordered_json epoch_summaries_json(const TrainingLog& log);

/// The winner sidecar: prompt resolution, the winning candidate, and all
/// candidates sorted by quality score descending (failed ones last,
/// anchor-index order inside ties).
nlohmann::ordered_json winner_sidecar_json(const InferenceResult& inference,
                                           const PromptSpec& prompt);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace regionedit
