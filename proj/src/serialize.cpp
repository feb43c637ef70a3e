#include "regionedit/serialize.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "regionedit/errors.hpp"

namespace regionedit {
namespace {

nlohmann::json vec_json(const VecX<double>& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

}  // namespace

nlohmann::ordered_json to_json(const Anchor& a) {
    return {{"row", a.row}, {"col", a.col}, {"score", a.score}};
}

nlohmann::ordered_json to_json(const BoxProposal& b) {
    return {{"size_index", b.size_index},
            {"r0", b.r0},
            {"c0", b.c0},
            {"r1", b.r1},
            {"c1", b.c1},
            {"anchor", to_json(b.anchor)}};
}

nlohmann::ordered_json to_json(const LossBreakdown& b) {
    return {{"clip", b.clip},
            {"structural", b.structural},
            {"directional", b.directional},
            {"total", b.total}};
}

nlohmann::ordered_json to_json(const QualityScore& q) {
    return {{"s_t2i", q.s_t2i}, {"s_i2i", q.s_i2i}, {"alpha", q.alpha},
            {"beta", q.beta},   {"s", q.s},         {"degenerate", q.degenerate}};
}

nlohmann::ordered_json to_json(const BackendCapability& c) {
    return {{"patch_stride", c.patch_stride},
            {"feature_dim", c.feature_dim},
            {"embed_dim", c.embed_dim},
            {"serial_only", c.serial_only}};
}

nlohmann::ordered_json to_json(const EditCandidate& c) {
    nlohmann::ordered_json j{
        {"anchor_index", c.anchor_index},
        {"anchor", to_json(c.anchor)},
        {"box", to_json(c.box)},
        {"mask", {{"height", c.mask.height()},
                  {"width", c.mask.width()},
                  {"ones", c.mask.ones_count()}}},
        {"edit_seed", c.edit_seed},
        {"failed", c.failed},
    };
    if (c.failed) {
        j["failure"] = c.failure;
    } else {
        j["edited"] = {{"height", c.edited.height()}, {"width", c.edited.width()}};
        j["losses"] = to_json(c.losses);
        j["score"] = to_json(c.score);
    }
    return j;
}

std::string training_log_jsonl(const TrainingLog& log) {
    std::ostringstream out;
    for (const TrainStepRecord& step : log.steps) {
        nlohmann::ordered_json line{
            {"epoch", step.epoch},
            {"anchor", step.anchor},
            {"j_star", step.j_star},
            {"soft_weights", vec_json(step.soft_weights)},
            {"loss_parts", to_json(step.loss_parts)},
            {"surrogate", step.surrogate},
            {"seed", step.seed},
        };
        if (step.skipped) {
            line["skipped"] = true;
            line["skip_reason"] = step.skip_reason;
        }
        out << line.dump() << '\n';
    }
    return out.str();
}

nlohmann::ordered_json epoch_summaries_json(const TrainingLog& log) {
    nlohmann::ordered_json arr = nlohmann::json::array();
    for (const EpochSummary& e : log.epochs) {
        nlohmann::json anchors = nlohmann::json::array();
        for (Index a = 0; a < e.softmax_per_anchor.rows(); ++a)
            anchors.push_back(vec_json(e.softmax_per_anchor.row(a).transpose()));
        arr.push_back(nlohmann::ordered_json{{"epoch", e.epoch},
                                             {"softmax_per_anchor", anchors}});
    }
    return arr;
}

nlohmann::ordered_json winner_sidecar_json(const InferenceResult& inference,
                                           const PromptSpec& prompt) {
    std::vector<const EditCandidate*> order;
    order.reserve(inference.candidates.size());
    for (const auto& c : inference.candidates) order.push_back(&c);
    std::stable_sort(order.begin(), order.end(),
                     [](const EditCandidate* a, const EditCandidate* b) {
                         if (a->failed != b->failed) return !a->failed;
                         if (a->failed) return false;
                         return a->score.s > b->score.s;
                     });
    nlohmann::ordered_json candidates = nlohmann::ordered_json::array();
    for (const EditCandidate* c : order) candidates.push_back(to_json(*c));
    return {{"format", "regionedit-winner"},
            {"version", 1},
            {"prompt", {{"prompt", prompt.prompt},
                        {"roi_text", prompt.resolved_roi_text()},
                        {"roi_text_defaulted", prompt.roi_text_defaulted()}}},
            {"winner", to_json(inference.winner)},
            {"candidates", candidates}};
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace regionedit
