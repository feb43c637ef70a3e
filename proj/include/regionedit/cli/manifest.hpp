#pragma once

#include <string>

#include <json.hpp>

#include "regionedit/backend.hpp"
#include "regionedit/losses.hpp"
#include "regionedit/trainer.hpp"

namespace regionedit::cli {

/// Wall-clock timestamps appear ONLY in the run manifest; every other
/// artifact must be byte-stable across reruns.
std::string utc_timestamp_now();

nlohmann::ordered_json config_json(const TrainConfig& config);

nlohmann::ordered_json backend_entry(const std::string& role, const Backend& backend);

/// Everything needed to reproduce a run with mock backends, plus run
/// accounting (cache and call counters) that may differ between reruns.
nlohmann::ordered_json make_run_manifest(const std::string& command,
                                         const TrainConfig& config,
                                         const PromptSpec& prompt,
                                         const BackendSet& backends,
                                         const nlohmann::ordered_json& accounting);

}  // namespace regionedit::cli
