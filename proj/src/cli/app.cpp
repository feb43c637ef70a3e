#include "regionedit/cli/app.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "regionedit/cli/cache.hpp"
#include "regionedit/cli/cached_backends.hpp"
#include "regionedit/cli/eval_harness.hpp"
#include "regionedit/cli/io_image.hpp"
#include "regionedit/cli/manifest.hpp"
#include "regionedit/cli/overlays.hpp"
#include "regionedit/errors.hpp"
#include "regionedit/mock_backends.hpp"
#include "regionedit/serialize.hpp"
#include "regionedit/trainer.hpp"

namespace regionedit::cli {
namespace {

namespace fs = std::filesystem;

struct CommonOpts {
    std::uint64_t seed = 0;
    long anchors = 8;
    int proposals = 7;
    int epochs = 5;
    double lr = 0.003;
    double alpha = kDefaultAlpha;
    double beta = kDefaultBeta;
    std::string roi_text;
    std::string gradient_mode = "full-eval";
    std::string backend = "mock";
    int jobs = 1;
    bool no_cache = false;
    std::string cache_dir;
    std::string out_dir = ".";
    std::string config_path;
};

std::string trim_ws(const std::string& text) {
    const auto begin = text.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = text.find_last_not_of(" \t\r\n");
    return text.substr(begin, end - begin + 1);
}

/// Applies key=value lines from `path` to `cmd`'s options, skipping any option
/// already given on the command line so explicit flags keep precedence.
void apply_config_file(CLI::App& cmd, const std::string& path) {
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string text = trim_ws(line);
        if (text.empty() || text[0] == '#' || text[0] == ';') continue;
        const auto eq = text.find('=');
        const std::string where = path + ":" + std::to_string(lineno);
        if (eq == std::string::npos)
            throw std::invalid_argument(where + ": expected key=value");
        const std::string key = trim_ws(text.substr(0, eq));
        const std::string value = trim_ws(text.substr(eq + 1));
        CLI::Option* opt = cmd.get_option_no_throw("--" + key);
        if (opt == nullptr)
            throw std::invalid_argument(where + ": unknown key \"" + key + "\"");
        if (!opt->empty()) continue;
        try {
            if (opt->get_expected_min() == 0)
                opt->add_result(opt->get_flag_value(key, value));
            else
                opt->add_result(value);
            opt->run_callback();
        } catch (const CLI::ParseError& e) {
            throw std::invalid_argument(where + ": " + e.what());
        }
    }
}

void add_common_options(CLI::App& cmd, CommonOpts& opts) {
    cmd.add_option("--config", opts.config_path,
                   "Config file with key=value lines (explicit flags win)");
    cmd.add_option("--seed", opts.seed, "Master seed");
    cmd.add_option("--anchors", opts.anchors, "Anchor count K")
        ->check(CLI::PositiveNumber);
    cmd.add_option("--proposals", opts.proposals, "Proposal count M")
        ->check(CLI::PositiveNumber);
    cmd.add_option("--epochs", opts.epochs, "Training epochs")
        ->check(CLI::NonNegativeNumber);
    cmd.add_option("--lr", opts.lr, "Adam learning rate");
    cmd.add_option("--alpha", opts.alpha, "Quality-score weight on text alignment");
    cmd.add_option("--beta", opts.beta, "Quality-score weight on content fidelity");
    cmd.add_option("--roi-text", opts.roi_text,
                   "Source-region text (default: \"a photo\")");
    cmd.add_option("--gradient-mode", opts.gradient_mode,
                   "Per-proposal loss gathering: full-eval or sampled-ema")
        ->check(CLI::IsMember({"full-eval", "sampled-ema"}));
    cmd.add_option("--backend", opts.backend, "Backend set")
        ->check(CLI::IsMember({"mock", "real"}));
    cmd.add_option("--jobs", opts.jobs, "Concurrent eval items")
        ->check(CLI::PositiveNumber);
    cmd.add_flag("--no-cache", opts.no_cache, "Bypass the feature/edit cache");
    cmd.add_option("--cache-dir", opts.cache_dir,
                   "Cache root (default: $REGIONEDIT_CACHE_DIR or .regionedit-cache)");
    cmd.add_option("--out", opts.out_dir, "Output directory");
}

TrainConfig make_config(const CommonOpts& opts) {
    TrainConfig config;
    config.K = opts.anchors;
    config.M = opts.proposals;
    config.epochs = opts.epochs;
    config.learning_rate = opts.lr;
    config.alpha = opts.alpha;
    config.beta = opts.beta;
    config.gradient_mode = gradient_mode_from_string(opts.gradient_mode);
    config.master_seed = opts.seed;
    validate_train_config(config);
    return config;
}

PromptSpec make_prompt(const std::string& prompt, const CommonOpts& opts) {
    PromptSpec spec;
    spec.prompt = prompt;
    if (!opts.roi_text.empty()) spec.roi_text = opts.roi_text;
    if (spec.prompt.empty()) throw std::invalid_argument("prompt must be nonempty");
    return spec;
}

/// Owns the backend stack for one run: mocks, optionally wrapped in cache
/// decorators. `set` always points at the outermost layer.
struct BackendStack {
    MockBackends mocks;
    std::unique_ptr<DiskCache> cache;
    std::unique_ptr<CachedFeatureBackend> cached_features;
    std::unique_ptr<CachedEditorBackend> cached_editor;
    BackendSet set;

    nlohmann::ordered_json accounting() const {
        nlohmann::ordered_json cache_part;
        if (cache) {
            cache_part = {{"enabled", true},
                          {"root", cache->root().string()},
                          {"hits", cache->hits()},
                          {"misses", cache->misses()},
                          {"evictions", cache->evictions()}};
        } else {
            cache_part = {{"enabled", false}};
        }
        return {{"cache", cache_part},
                {"backend_calls",
                 {{"features", mocks.features->stats().calls()},
                  {"embed_image", mocks.scorer->image_stats().calls()},
                  {"embed_text", mocks.scorer->text_stats().calls()},
                  {"patch_tokens", mocks.scorer->token_stats().calls()},
                  {"edits", mocks.editor->stats().calls()}}}};
    }
};

BackendStack make_backend_stack(const CommonOpts& opts) {
    if (opts.backend == "real")
        throw BackendError(
            "real backends are not wired into this build; docs/adapters.md "
            "describes the adapter contract",
            false);
    BackendStack stack;
    stack.mocks = make_mock_backends(kMockWorldSeed);
    stack.set = stack.mocks.set();
    if (!opts.no_cache) {
        stack.cache = std::make_unique<DiskCache>(resolve_cache_root(opts.cache_dir));
        stack.cached_features = std::make_unique<CachedFeatureBackend>(
            *stack.mocks.features, *stack.cache);
        stack.cached_editor =
            std::make_unique<CachedEditorBackend>(*stack.mocks.editor, *stack.cache);
        stack.set.features = stack.cached_features.get();
        stack.set.editor = stack.cached_editor.get();
    }
    return stack;
}

ImageBuffer load_input_image(const std::string& path, const BackendSet& backends) {
    ImageBuffer image = load_image(path);
    const Index stride = backends.features->capability().patch_stride;
    if (stride > 0 && (image.height() % stride != 0 || image.width() % stride != 0)) {
        std::ostringstream msg;
        msg << path << ": image is " << image.height() << "x" << image.width()
            << " but this backend needs both dimensions divisible by " << stride;
        throw IoError(msg.str());
    }
    return image;
}

void write_common_artifacts(const fs::path& out_dir, const TrainResult& trained,
                            const InferenceResult& inference,
                            const PromptSpec& prompt) {
    save_png((out_dir / "edited.png").string(), inference.winner.edited);
    write_text_file((out_dir / "winner.json").string(),
                    winner_sidecar_json(inference, prompt).dump(2) + "\n");
    write_text_file((out_dir / "training_log.jsonl").string(),
                    training_log_jsonl(trained.log));
    write_text_file((out_dir / "epoch_summaries.json").string(),
                    epoch_summaries_json(trained.log).dump(2) + "\n");
    save_region_generator_file(trained.params, (out_dir / "params.bin").string());
}

void write_inspect_artifacts(const fs::path& out_dir, const ImageBuffer& image,
                             const TrainResult& trained,
                             const InferenceResult& inference,
                             const PromptSpec& prompt, const BackendSet& backends,
                             const TrainConfig& config) {
    auto [fmap, attn] = backends.features->extract(image);
    (void)fmap;
    save_png((out_dir / "heatmap.png").string(),
             heatmap_image(attn, image.height(), image.width()));

    ProposalConfig proposal_config;
    proposal_config.M = config.M;
    proposal_config.scale_step = config.scale_step;
    for (std::size_t a = 0; a < trained.anchors.size(); ++a) {
        const auto proposals = make_proposals(trained.anchors[a], proposal_config,
                                              trained.grid_h, trained.grid_w);
        std::ostringstream name;
        name << "proposals_anchor" << a << ".png";
        save_png((out_dir / name.str()).string(),
                 proposals_overlay(image, proposals, trained.patch_stride));
    }

    save_png((out_dir / "selected_regions.png").string(),
             selection_overlay(image, inference.candidates, inference.winner_index,
                               trained.patch_stride));

    std::vector<const EditCandidate*> by_score;
    by_score.reserve(inference.candidates.size());
    for (const auto& c : inference.candidates) by_score.push_back(&c);
    std::stable_sort(by_score.begin(), by_score.end(),
                     [](const EditCandidate* x, const EditCandidate* y) {
                         if (x->failed != y->failed) return !x->failed;
                         if (x->failed) return false;
                         return x->score.s > y->score.s;
                     });
    for (std::size_t rank = 0; rank < by_score.size(); ++rank) {
        if (by_score[rank]->failed) continue;
        std::ostringstream name;
        name << "candidate_r" << rank << "_a" << by_score[rank]->anchor_index
             << ".png";
        save_png((out_dir / name.str()).string(),
                 candidate_panel(*by_score[rank], trained.patch_stride));
    }

    nlohmann::ordered_json doc = winner_sidecar_json(inference, prompt);
    doc["format"] = "regionedit-inspect";
    nlohmann::ordered_json anchor_list = nlohmann::ordered_json::array();
    for (const Anchor& a : trained.anchors) anchor_list.push_back(to_json(a));
    doc["anchors"] = std::move(anchor_list);
    write_text_file((out_dir / "inspect.json").string(), doc.dump(2) + "\n");
}

int cmd_edit_or_inspect(bool inspect, const std::string& image_path,
                        const std::string& prompt_text, const CommonOpts& opts,
                        std::ostream& out) {
    const TrainConfig config = make_config(opts);
    const PromptSpec prompt = make_prompt(prompt_text, opts);
    BackendStack stack = make_backend_stack(opts);
    const ImageBuffer image = load_input_image(image_path, stack.set);

    const TrainResult trained = train_region_generator(image, prompt, stack.set, config);
    const InferenceResult inference =
        infer_best_edit(image, prompt, trained.params, stack.set, config);

    const fs::path out_dir(opts.out_dir);
    fs::create_directories(out_dir);
    write_common_artifacts(out_dir, trained, inference, prompt);
    if (inspect)
        write_inspect_artifacts(out_dir, image, trained, inference, prompt, stack.set,
                                config);
    write_text_file((out_dir / "manifest.json").string(),
                    make_run_manifest(inspect ? "inspect" : "edit", config, prompt,
                                      stack.set, stack.accounting())
                            .dump(2) +
                        "\n");

    const EditCandidate& w = inference.winner;
    out << "winner anchor=" << w.anchor_index << " grid_rect=(" << w.box.r0 << ","
        << w.box.c0 << "," << w.box.r1 << "," << w.box.c1 << ") s=" << w.score.s
        << " s_t2i=" << w.score.s_t2i << " s_i2i=" << w.score.s_i2i << "\n"
        << "artifacts written to " << out_dir.string() << "\n";
    return 0;
}

std::vector<std::string> split_csv(const std::string& text) {
    std::vector<std::string> parts;
    std::istringstream in(text);
    std::string part;
    while (std::getline(in, part, ','))
        if (!part.empty()) parts.push_back(part);
    return parts;
}

int cmd_eval(const std::string& manifest_path, const CommonOpts& opts,
             const std::string& methods_arg, const std::string& sweep_m,
             const std::string& sweep_k, bool sweep_loss, std::ostream& out) {
    const TrainConfig config = make_config(opts);
    BackendStack stack = make_backend_stack(opts);

    std::vector<std::string> methods = split_csv(methods_arg);
    for (const std::string& m : split_csv(sweep_m)) methods.push_back("ours-m" + m);
    for (const std::string& k : split_csv(sweep_k)) methods.push_back("ours-k" + k);
    if (sweep_loss)
        for (const char* m : {"ours", "ours-no-clip", "ours-no-str", "ours-no-dir"})
            methods.emplace_back(m);
    if (methods.empty()) methods.emplace_back("ours");
    for (const std::string& m : methods) (void)method_config(config, m);

    std::vector<EvalItem> items = load_eval_manifest(manifest_path);
    if (!opts.roi_text.empty())
        for (EvalItem& item : items)
            if (!item.prompt.roi_text) item.prompt.roi_text = opts.roi_text;

    const EvalReport report = run_eval(items, methods, config, stack.set, opts.jobs);

    const fs::path out_dir(opts.out_dir);
    fs::create_directories(out_dir);
    const std::string csv = eval_csv(report);
    write_text_file((out_dir / "eval.csv").string(), csv);
    write_text_file((out_dir / "eval.json").string(),
                    eval_report_json(report).dump(2) + "\n");
    write_text_file((out_dir / "manifest.json").string(),
                    make_run_manifest("eval", config, items.front().prompt, stack.set,
                                      stack.accounting())
                            .dump(2) +
                        "\n");
    out << csv;
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
    CLI::App app{"Mask-free text-driven local image editing with learned square "
                 "edit regions"};
    app.name("regionedit");

    CommonOpts edit_opts, inspect_opts, eval_opts;
    std::string edit_image, edit_prompt, inspect_image, inspect_prompt;
    std::string eval_manifest, eval_methods, eval_sweep_m, eval_sweep_k;
    bool eval_sweep_loss = false;
    std::string cache_dir_opt;

    CLI::App* edit = app.add_subcommand(
        "edit", "Optimize square edit regions for one image+prompt, write the best edit");
    edit->add_option("image", edit_image, "Input image (PNG or JPEG)")->required();
    edit->add_option("prompt", edit_prompt, "Editing prompt")->required();
    add_common_options(*edit, edit_opts);

    CLI::App* inspect = app.add_subcommand(
        "inspect", "Run the pipeline and emit overlays plus every candidate edit");
    inspect->add_option("image", inspect_image, "Input image (PNG or JPEG)")->required();
    inspect->add_option("prompt", inspect_prompt, "Editing prompt")->required();
    add_common_options(*inspect, inspect_opts);

    CLI::App* eval = app.add_subcommand(
        "eval", "Score editing methods over an image+prompt manifest");
    eval->add_option("manifest", eval_manifest, "JSON manifest of eval items")
        ->required();
    eval->add_option("--methods", eval_methods,
                     "Comma list: ours, random-random, dino-random, ours-m<N>, "
                     "ours-k<N>, ours-no-{clip,str,dir}");
    eval->add_option("--sweep-m", eval_sweep_m, "Comma list of M values to sweep");
    eval->add_option("--sweep-k", eval_sweep_k, "Comma list of K values to sweep");
    eval->add_flag("--sweep-loss", eval_sweep_loss,
                   "Add ours plus rows dropping each loss term in turn");
    add_common_options(*eval, eval_opts);

    CLI::App* cache_cmd = app.add_subcommand("cache", "Cache maintenance");
    cache_cmd->add_option("--cache-dir", cache_dir_opt,
                          "Cache root (default: $REGIONEDIT_CACHE_DIR or "
                          ".regionedit-cache)");
    CLI::App* cache_info =
        cache_cmd->add_subcommand("info", "Show cache location and entry count");
    CLI::App* cache_clear =
        cache_cmd->add_subcommand("clear", "Remove all cache entries");
    // Let --cache-dir appear after info/clear by falling through to the parent.
    cache_info->fallthrough();
    cache_clear->fallthrough();
    cache_cmd->require_subcommand(1);

    app.require_subcommand(1);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 64;
    }

    try {
        if (edit->parsed()) {
            apply_config_file(*edit, edit_opts.config_path);
            return cmd_edit_or_inspect(false, edit_image, edit_prompt, edit_opts, out);
        }
        if (inspect->parsed()) {
            apply_config_file(*inspect, inspect_opts.config_path);
            return cmd_edit_or_inspect(true, inspect_image, inspect_prompt,
                                       inspect_opts, out);
        }
        if (eval->parsed()) {
            apply_config_file(*eval, eval_opts.config_path);
            return cmd_eval(eval_manifest, eval_opts, eval_methods, eval_sweep_m,
                            eval_sweep_k, eval_sweep_loss, out);
        }
        if (cache_cmd->parsed()) {
            DiskCache cache(resolve_cache_root(cache_dir_opt));
            if (cache_info->parsed())
                out << "cache root: " << cache.root().string() << "\n"
                    << "entries: " << cache.entry_count() << "\n";
            if (cache_clear->parsed()) out << "removed " << cache.clear() << " entries\n";
            return 0;
        }
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const BackendError& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 64;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 64;
}

}  // namespace regionedit::cli
