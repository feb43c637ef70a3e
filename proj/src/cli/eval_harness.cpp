#include "regionedit/cli/eval_harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <thread>

#include "regionedit/cli/baselines.hpp"
#include "regionedit/cli/io_image.hpp"
#include "regionedit/errors.hpp"
#include "regionedit/geometry.hpp"
#include "regionedit/serialize.hpp"

namespace regionedit::cli {
namespace {

namespace fs = std::filesystem;

struct ItemScore {
    bool ok = false;
    double s_t2i = 0.0;
    double s_i2i = 0.0;
};

enum class MethodKind { kOurs, kRandomRandom, kDinoRandom };

MethodKind method_kind(const std::string& method) {
    if (method.rfind("ours", 0) == 0) return MethodKind::kOurs;
    if (method == "random-random") return MethodKind::kRandomRandom;
    if (method == "dino-random") return MethodKind::kDinoRandom;
    throw std::invalid_argument("unknown eval method: " + method);
}

/// Baselines share the learned pipeline's scoring: K candidate boxes, one
/// edit each, winner by quality score.
ItemScore run_baseline(const ImageBuffer& image, const PromptSpec& prompt,
                       const BackendSet& backends, const TrainConfig& config,
                       MethodKind kind, std::uint64_t item_seed) {
    const Index stride = backends.features->capability().patch_stride;
    SplitMix64 rng(derive_seed(item_seed, "baseline-draws"));
    std::vector<BoxProposal> boxes;
    if (kind == MethodKind::kDinoRandom) {
        auto [fmap, attn] = backends.features->extract(image);
        for (const Anchor& a : select_anchors(attn, {config.K}))
            boxes.push_back(baseline_dino_random(image, a, stride, rng).box);
    } else {
        for (Index a = 0; a < config.K; ++a)
            boxes.push_back(baseline_random_random(image, stride, rng).box);
    }
    std::vector<EditCandidate> candidates;
    for (Index a = 0; a < static_cast<Index>(boxes.size()); ++a) {
        EditCandidate c;
        c.anchor_index = a;
        c.anchor = boxes[static_cast<std::size_t>(a)].anchor;
        c.box = boxes[static_cast<std::size_t>(a)];
        c.mask = rasterize_mask(c.box, stride, image.height(), image.width());
        c.edit_seed = derive_seed(item_seed, "baseline-edit",
                                  {static_cast<std::uint64_t>(a)});
        try {
            c.edited = backends.editor->edit(image, c.mask, prompt.prompt, c.edit_seed);
            c.score = quality_score(*backends.scorer, image, c.edited, prompt,
                                    config.alpha, config.beta);
        } catch (const BackendError& e) {
            c.failed = true;
            c.failure = e.what();
        }
        candidates.push_back(std::move(c));
    }
    const Index winner = pick_winner(candidates);
    const QualityScore& q = candidates[static_cast<std::size_t>(winner)].score;
    return {true, q.s_t2i, q.s_i2i};
}

ItemScore run_ours(const ImageBuffer& image, const PromptSpec& prompt,
                   const BackendSet& backends, TrainConfig config,
                   std::uint64_t item_seed) {
    config.master_seed = item_seed;
    const TrainResult trained = train_region_generator(image, prompt, backends, config);
    const InferenceResult inference =
        infer_best_edit(image, prompt, trained.params, backends, config);
    return {true, inference.winner.score.s_t2i, inference.winner.score.s_i2i};
}

}  // namespace

std::vector<EvalItem> load_eval_manifest(const std::string& path) {
    nlohmann::json doc = nlohmann::json::parse(read_text_file(path), nullptr, false);
    if (doc.is_discarded() || !doc.contains("items") || !doc["items"].is_array())
        throw IoError("eval manifest: expected a JSON object with an items array: " +
                      path);
    const fs::path base = fs::path(path).parent_path();
    std::vector<EvalItem> items;
    for (const auto& entry : doc["items"]) {
        EvalItem item;
        item.image_path = (base / entry.at("image").get<std::string>()).string();
        item.prompt.prompt = entry.at("prompt").get<std::string>();
        if (entry.contains("roi_text"))
            item.prompt.roi_text = entry["roi_text"].get<std::string>();
        if (item.prompt.prompt.empty())
            throw IoError("eval manifest: empty prompt");
        items.push_back(std::move(item));
    }
    if (items.empty()) throw IoError("eval manifest: no items: " + path);
    return items;
}

TrainConfig method_config(const TrainConfig& base, const std::string& method) {
    TrainConfig config = base;
    if (method == "ours" || method == "random-random" || method == "dino-random")
        return config;
    if (method == "ours-no-clip") {
        config.weights.lambda_clip = 0.0;
        return config;
    }
    if (method == "ours-no-str") {
        config.weights.lambda_str = 0.0;
        return config;
    }
    if (method == "ours-no-dir") {
        config.weights.lambda_dir = 0.0;
        return config;
    }
    auto parse_suffix = [&](const char* prefix) -> int {
        const std::size_t n = std::string(prefix).size();
        if (method.rfind(prefix, 0) != 0) return -1;
        try {
            std::size_t used = 0;
            const int v = std::stoi(method.substr(n), &used);
            if (used != method.size() - n || v < 1) return -1;
            return v;
        } catch (const std::exception&) {
            return -1;
        }
    };
    if (const int m = parse_suffix("ours-m"); m > 0) {
        config.M = m;
        return config;
    }
    if (const int k = parse_suffix("ours-k"); k > 0) {
        config.K = k;
        return config;
    }
    throw std::invalid_argument("unknown eval method: " + method);
}

EvalReport run_eval(const std::vector<EvalItem>& items,
                    const std::vector<std::string>& methods,
                    const TrainConfig& base, const BackendSet& backends, int jobs) {
    if (items.empty()) throw std::invalid_argument("run_eval: no items");
    if (methods.empty()) throw std::invalid_argument("run_eval: no methods");
    if (jobs < 1) throw std::invalid_argument("run_eval: jobs must be >= 1");
    const bool serial_backend = backends.features->capability().serial_only ||
                                backends.scorer->capability().serial_only ||
                                backends.editor->capability().serial_only;
    const int workers =
        serial_backend ? 1 : std::min<int>(jobs, static_cast<int>(items.size()));

    // Images load once, up front, so a bad path fails the whole run early
    // instead of surfacing as a per-row failure count.
    std::vector<ImageBuffer> images;
    images.reserve(items.size());
    for (const EvalItem& item : items) images.push_back(load_image(item.image_path));

    EvalReport report;
    for (const std::string& method : methods) {
        const TrainConfig config = method_config(base, method);
        const MethodKind kind = method_kind(method);
        std::vector<ItemScore> scores(items.size());
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            for (std::size_t i = next.fetch_add(1); i < items.size();
                 i = next.fetch_add(1)) {
                const std::uint64_t item_seed =
                    derive_seed(base.master_seed, "eval-item", {i});
                try {
                    scores[i] = kind == MethodKind::kOurs
                                    ? run_ours(images[i], items[i].prompt, backends,
                                               config, item_seed)
                                    : run_baseline(images[i], items[i].prompt,
                                                   backends, config, kind, item_seed);
                } catch (const std::exception&) {
                    scores[i] = {};
                }
            }
        };
        if (workers == 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            pool.reserve(static_cast<std::size_t>(workers));
            for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
            for (auto& t : pool) t.join();
        }

        EvalRow row;
        row.method = method;
        for (const ItemScore& s : scores) {
            if (!s.ok) {
                ++row.n_failed;
                continue;
            }
            row.s_t2i_mean += s.s_t2i;
            row.s_i2i_mean += s.s_i2i;
            ++row.n_images;
        }
        if (row.n_images > 0) {
            row.s_t2i_mean /= row.n_images;
            row.s_i2i_mean /= row.n_images;
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

std::string eval_csv(const EvalReport& report) {
    std::string out = "method,s_t2i_mean,s_i2i_mean,n_images,n_failed\n";
    char line[256];
    for (const EvalRow& row : report.rows) {
        std::snprintf(line, sizeof(line), "%s,%.6f,%.6f,%d,%d\n", row.method.c_str(),
                      row.s_t2i_mean, row.s_i2i_mean, row.n_images, row.n_failed);
        out += line;
    }
    return out;
}

nlohmann::ordered_json eval_report_json(const EvalReport& report) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const EvalRow& row : report.rows)
        rows.push_back(nlohmann::ordered_json{{"method", row.method},
                                              {"s_t2i_mean", row.s_t2i_mean},
                                              {"s_i2i_mean", row.s_i2i_mean},
                                              {"n_images", row.n_images},
                                              {"n_failed", row.n_failed}});
    return {{"format", "regionedit-eval"}, {"version", 1}, {"rows", rows}};
}

}  // namespace regionedit::cli
