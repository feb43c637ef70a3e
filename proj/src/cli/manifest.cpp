#include "regionedit/cli/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>

#include "regionedit/serialize.hpp"

namespace regionedit::cli {

std::string utc_timestamp_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[80];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ",
                  tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                  tm.tm_min, tm.tm_sec);
    return buf;
}

nlohmann::ordered_json config_json(const TrainConfig& config) {
    return {{"K", config.K},
            {"M", config.M},
            {"l", config.l},
            {"scale_step", config.scale_step},
            {"epochs", config.epochs},
            {"learning_rate", config.learning_rate},
            {"batch_size", config.batch_size},
            {"lambda_clip", config.weights.lambda_clip},
            {"lambda_str", config.weights.lambda_str},
            {"lambda_dir", config.weights.lambda_dir},
            {"alpha", config.alpha},
            {"beta", config.beta},
            {"gradient_mode", to_string(config.gradient_mode)},
            {"ema_decay", config.ema_decay},
            {"steps_per_epoch", config.resolved_steps_per_epoch()},
            {"master_seed", config.master_seed},
            {"editor_retries", config.editor_retries},
            {"network", {{"conv1_out", config.network_shape.conv1_out},
                         {"conv2_out", config.network_shape.conv2_out},
                         {"fc1_out", config.network_shape.fc1_out}}}};
}

nlohmann::ordered_json backend_entry(const std::string& role, const Backend& backend) {
    return {{"role", role},
            {"identifier", backend.identifier()},
            {"checksum", backend.checksum()},
            {"capability", to_json(backend.capability())}};
}

nlohmann::ordered_json make_run_manifest(const std::string& command,
                                         const TrainConfig& config,
                                         const PromptSpec& prompt,
                                         const BackendSet& backends,
                                         const nlohmann::ordered_json& accounting) {
    nlohmann::ordered_json backend_list = nlohmann::json::array();
    if (backends.features)
        backend_list.push_back(backend_entry("features", *backends.features));
    if (backends.scorer)
        backend_list.push_back(backend_entry("scorer", *backends.scorer));
    if (backends.editor)
        backend_list.push_back(backend_entry("editor", *backends.editor));
    return {{"format", "regionedit-manifest"},
            {"version", 1},
            {"command", command},
            {"created_utc", utc_timestamp_now()},
            {"master_seed", config.master_seed},
            {"config", config_json(config)},
            {"prompt", {{"prompt", prompt.prompt},
                        {"roi_text", prompt.resolved_roi_text()},
                        {"roi_text_defaulted", prompt.roi_text_defaulted()}}},
            {"backends", backend_list},
            {"design_flags",
             {{"gradient_mode", to_string(config.gradient_mode)},
              {"surrogate", "weighted-detached-loss"},
              {"anchor_tie_rule", "row-major-index-ascending"},
              {"winner_tie_rule", "lowest-anchor-index"},
              {"attention_heads", "mean"},
              {"inference_noise", "none"}}},
            {"accounting", accounting}};
}

}  // namespace regionedit::cli
