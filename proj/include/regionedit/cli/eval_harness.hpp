#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "regionedit/backend.hpp"
#include "regionedit/trainer.hpp"

namespace regionedit::cli {

struct EvalItem {
    std::string image_path;
    PromptSpec prompt;
};

struct EvalRow {
    std::string method;
    double s_t2i_mean = 0.0;
    double s_i2i_mean = 0.0;
    int n_images = 0;  // items that produced a scored edit
    int n_failed = 0;
};

struct EvalReport {
    std::vector<EvalRow> rows;
};

/// Manifest file: {"items": [{"image": path, "prompt": text,
/// "roi_text"?: text}, ...]}. Paths are resolved relative to the manifest's
/// directory.
std::vector<EvalItem> load_eval_manifest(const std::string& path);

/// Method row specs: "ours", "random-random", "dino-random", plus sweep
/// variants "ours-m<N>", "ours-k<N>", "ours-no-clip", "ours-no-str",
/// "ours-no-dir". Throws std::invalid_argument on anything else.
TrainConfig method_config(const TrainConfig& base, const std::string& method);

/// Runs every method over every item. Per-item master seeds derive from
/// (base seed, item index) only, so results are independent of scheduling;
/// items may run on up to `jobs` threads.
EvalReport run_eval(const std::vector<EvalItem>& items,
                    const std::vector<std::string>& methods,
                    const TrainConfig& base, const BackendSet& backends, int jobs);

/// Header: method,s_t2i_mean,s_i2i_mean,n_images,n_failed. Fixed 6-decimal
/// formatting keeps reruns byte-identical.
std::string eval_csv(const EvalReport& report);

nlohmann::ordered_json eval_report_json(const EvalReport& report);

}  // namespace regionedit::cli
