// End-to-end acceptance checks, one line of output per criterion. Exits
// nonzero when any gated criterion fails. argv[1] is the path to the CLI
// binary, used by the criteria that must exercise the shipped executable
// rather than the library.
#include <chrono>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "regionedit/anchors.hpp"
#include "regionedit/cli/io_image.hpp"
#include "regionedit/geometry.hpp"
#include "regionedit/gumbel.hpp"
#include "regionedit/losses.hpp"
#include "regionedit/mock_backends.hpp"
#include "regionedit/region_network.hpp"
#include "regionedit/rng.hpp"
#include "regionedit/roi_pool.hpp"
#include "regionedit/serialize.hpp"
#include "regionedit/trainer.hpp"
#include "testutil/oracles.hpp"
#include "testutil/scenario.hpp"
#include "testutil/tempdir.hpp"

using namespace regionedit;
namespace fs = std::filesystem;

namespace {

struct CriterionFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

[[noreturn]] void fail(const std::string& message) { throw CriterionFailure(message); }

void require(bool ok, const std::string& message) {
    if (!ok) fail(message);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
}

std::string fmt(double value) {
    std::ostringstream out;
    out.precision(3);
    out << value;
    return out.str();
}

// --- criterion 1: hard Gumbel-max draws follow softmax(logits) ------------

std::string check_gumbel_max_frequencies() {
    const auto start = std::chrono::steady_clock::now();
    VecX<double> logits(6);
    logits << 1.0, 0.0, -1.0, 1.0, 0.0, -1.0;
    const VecX<double> expected = softmax(logits);

    const int draws = 100000;
    VecX<double> counts = VecX<double>::Zero(logits.size());
    for (int i = 0; i < draws; ++i) {
        const auto sample = sample_gumbel_selection(
            logits, derive_seed(0xACCE97, "gumbel-freq",
                                {static_cast<std::uint64_t>(i)}));
        counts(sample.j_star - 1) += 1.0;
    }
    const VecX<double> freq = counts / static_cast<double>(draws);
    const double max_dev = (freq - expected).cwiseAbs().maxCoeff();
    const double elapsed = seconds_since(start);
    require(max_dev <= 0.01, "frequency deviates from softmax by " + fmt(max_dev));
    require(elapsed < 10.0, "took " + fmt(elapsed) + " s, budget 10 s");
    return "100k draws, max |freq - softmax| = " + fmt(max_dev) + ", " +
           fmt(elapsed) + " s";
}

// --- criterion 2: straight-through gradient vs central differences --------

std::string check_straight_through_gradient() {
    const auto start = std::chrono::steady_clock::now();
    SplitMix64 rng(0x57AD);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const Index m = 2 + static_cast<Index>(rng.next() % 7);
        VecX<double> logits(m), losses(m);
        for (Index k = 0; k < m; ++k) {
            logits(k) = rng.next_in(-2.0, 2.0);
            losses(k) = rng.next_in(0.0, 2.0);
        }
        const VecX<double> zero = VecX<double>::Zero(m);
        const VecX<double> analytic =
            surrogate_grad_logits(selection_from_noise(logits, zero), losses);

        VecX<double> fd(m);
        const double h = 1e-5;
        for (Index k = 0; k < m; ++k) {
            VecX<double> up = logits, down = logits;
            up(k) += h;
            down(k) -= h;
            fd(k) = (surrogate_value(selection_from_noise(up, zero), losses) -
                     surrogate_value(selection_from_noise(down, zero), losses)) /
                    (2.0 * h);
        }
        const double scale = std::max(fd.cwiseAbs().maxCoeff(), 1e-8);
        worst = std::max(worst, (analytic - fd).cwiseAbs().maxCoeff() / scale);
    }
    const double elapsed = seconds_since(start);
    require(worst <= 1e-4, "worst relative gradient error " + fmt(worst));
    require(elapsed < 5.0, "took " + fmt(elapsed) + " s, budget 5 s");
    return "100 instances, worst relative error = " + fmt(worst) + ", " +
           fmt(elapsed) + " s";
}

// --- criterion 3: library vs independent oracles ---------------------------

std::string check_oracle_equivalence() {
    SplitMix64 rng(0x0AC1E);

    for (int trial = 0; trial < 1000; ++trial) {
        const Index h = 1 + static_cast<Index>(rng.next() % 12);
        const Index w = 1 + static_cast<Index>(rng.next() % 12);
        AttentionMap attn{MatX<double>(h, w)};
        for (Index r = 0; r < h; ++r)
            for (Index c = 0; c < w; ++c) {
                double v = rng.next_unit();
                if (trial % 3 == 0) v = std::floor(v * 8.0) / 8.0;  // force ties
                attn.scores(r, c) = v;
            }
        const Index k = 1 + static_cast<Index>(rng.next() %
                                               static_cast<std::uint64_t>(h * w));
        const auto got = select_anchors(attn, {k});
        const auto want = testutil::oracle_top_k(attn, k);
        require(got.size() == want.size(), "anchor count mismatch");
        for (std::size_t i = 0; i < got.size(); ++i)
            require(got[i].row == want[i].row && got[i].col == want[i].col &&
                        got[i].score == want[i].score,
                    "anchor mismatch at rank " + std::to_string(i));
    }

    double worst_pool = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const Index gh = 2 + static_cast<Index>(rng.next() % 7);
        const Index gw = 2 + static_cast<Index>(rng.next() % 7);
        const Index d = 1 + static_cast<Index>(rng.next() % 4);
        const Index l = 1 + static_cast<Index>(rng.next() % 7);
        FeatureMap f = FeatureMap::zeros(d, gh, gw);
        for (Index i = 0; i < f.data.size(); ++i)
            f.data.data()[i] = rng.next_in(-1.0, 1.0);
        const Index r0 = static_cast<Index>(rng.next() % static_cast<std::uint64_t>(gh));
        const Index c0 = static_cast<Index>(rng.next() % static_cast<std::uint64_t>(gw));
        const Index r1 = r0 + static_cast<Index>(
                                  rng.next() % static_cast<std::uint64_t>(gh - r0));
        const Index c1 = c0 + static_cast<Index>(
                                  rng.next() % static_cast<std::uint64_t>(gw - c0));
        const auto box = BoxProposal::from_rect({r0, c0, 0.0}, r0, c0, r1, c1, gh, gw);
        const double dev =
            (roi_pool(f, box, l).data - testutil::oracle_roi_pool(f, box, l))
                .cwiseAbs()
                .maxCoeff();
        worst_pool = std::max(worst_pool, dev);
    }
    require(worst_pool <= 1e-5, "roi_pool deviates from oracle by " + fmt(worst_pool));

    double worst_sim = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const Index n = 2 + static_cast<Index>(rng.next() % 11);
        const Index c = 1 + static_cast<Index>(rng.next() % 8);
        MatX<double> tokens(n, c);
        for (Index i = 0; i < tokens.size(); ++i)
            tokens.data()[i] = rng.next_in(-1.0, 1.0);
        if (trial % 4 == 0) tokens.row(0).setZero();  // degenerate-row rule
        const double dev =
            (self_similarity(tokens) - testutil::oracle_self_similarity(tokens))
                .cwiseAbs()
                .maxCoeff();
        worst_sim = std::max(worst_sim, dev);
    }
    require(worst_sim <= 1e-6,
            "self_similarity deviates from oracle by " + fmt(worst_sim));

    return "anchors exact on 1000 maps; roi_pool within " + fmt(worst_pool) +
           " on 200 boxes; self-similarity within " + fmt(worst_sim);
}

// --- criterion 4: loss identities ------------------------------------------

ImageBuffer random_image(SplitMix64& rng, Index h, Index w, double amplitude) {
    ImageBuffer img(h, w);
    for (auto& plane : img.plane)
        for (Index i = 0; i < plane.size(); ++i)
            plane.data()[i] = rng.next_unit() * amplitude;
    return img;
}

std::string check_loss_identities() {
    auto mocks = make_mock_backends(0x10E5);
    SplitMix64 rng(0xF41);

    for (int trial = 0; trial < 20; ++trial) {
        const ImageBuffer img = random_image(rng, 32, 32, 1.0);
        const double value = structural_loss(*mocks.scorer, img, img);
        require(value == 0.0,
                "structural self-loss is " + fmt(value) + ", expected exact 0");
    }

    for (int trial = 0; trial < 1000; ++trial) {
        const Index h = 16 * (1 + static_cast<Index>(rng.next() % 3));
        const Index w = 16 * (1 + static_cast<Index>(rng.next() % 3));
        const double amplitude = trial % 7 == 0 ? 1e-12 : 1.0;
        const ImageBuffer img = random_image(rng, h, w, amplitude);
        const double value = clip_loss(*mocks.scorer, img, {"red", std::nullopt});
        require(std::isfinite(value) && value >= 0.0 && value <= 2.0,
                "prompt-alignment loss " + fmt(value) + " outside [0, 2]");
    }

    for (int trial = 0; trial < 100; ++trial) {
        const double c = rng.next_in(0.0, 2.0);
        const double s = rng.next_in(0.0, 40.0);
        const double d = rng.next_in(0.0, 2.0);
        LossWeights weights;
        weights.lambda_clip = rng.next_in(0.0, 3.0);
        weights.lambda_str = rng.next_in(0.0, 3.0);
        weights.lambda_dir = rng.next_in(0.0, 3.0);
        const LossBreakdown combined = composite_loss(weights, c, s, d);
        const double want = weights.lambda_clip * c + weights.lambda_str * s +
                            weights.lambda_dir * d;
        require(std::abs(combined.total - want) <= 1e-6,
                "weighted total off by " + fmt(std::abs(combined.total - want)));
        const LossBreakdown unit = composite_loss({}, c, s, d);
        require(unit.total == c + s + d,
                "unit-weight total differs from the plain sum");
    }

    return "structural self-loss exactly 0; alignment loss in [0, 2] on 1000 "
           "inputs; composite equals the weighted sum";
}

// --- criterion 5: training finds the enumerated optimum --------------------

std::string check_scenario_convergence() {
    const auto start = std::chrono::steady_clock::now();
    testutil::Scenario scenario = testutil::make_scenario();
    const int j_dagger = testutil::scenario_j_dagger(scenario);

    int converged = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        scenario.config.master_seed = seed;
        const TrainResult result = train_region_generator(
            scenario.image, scenario.prompt, scenario.set(), scenario.config);
        const MatX<double>& soft = result.log.epochs.back().softmax_per_anchor;
        bool all = true;
        for (Index a = 0; a < soft.rows(); ++a) {
            Index best = 0;
            for (Index j = 1; j < soft.cols(); ++j)
                if (soft(a, j) > soft(a, best)) best = j;
            if (static_cast<int>(best) + 1 != j_dagger) all = false;
        }
        if (all) ++converged;
    }
    const double elapsed = seconds_since(start);
    require(converged >= 9, "only " + std::to_string(converged) +
                                "/10 seeds selected the enumerated optimum");
    require(elapsed < 60.0, "took " + fmt(elapsed) + " s, budget 60 s");
    return "unique optimum j=" + std::to_string(j_dagger) + " by enumeration; " +
           std::to_string(converged) + "/10 seeds converged, " + fmt(elapsed) + " s";
}

// --- criterion 6: inference winner equals the brute-force argmax ------------

Index brute_force_winner(const std::vector<EditCandidate>& candidates) {
    Index best = -1;
    double best_q = 0.0;
    for (Index i = 0; i < static_cast<Index>(candidates.size()); ++i) {
        const auto& c = candidates[static_cast<std::size_t>(i)];
        if (c.failed) continue;
        const double q = 2.0 * c.score.s_t2i + 1.0 * c.score.s_i2i;
        if (best < 0 || q > best_q) {
            best = i;
            best_q = q;
        }
    }
    require(best >= 0, "no successful candidate in brute-force search");
    return best;
}

std::string check_inference_ranking() {
    auto mocks = make_mock_backends(0x1DEA, 8);
    SplitMix64 rng(0x9A7E);

    TrainConfig config;
    config.K = 3;
    config.M = 2;
    config.l = 4;
    config.network_shape = {8, 8, 8};

    for (int trial = 0; trial < 50; ++trial) {
        const ImageBuffer img = random_image(rng, 48, 48, 1.0);
        RegionGeneratorParams params = make_region_generator_params(
            config.M, 8, config.l, rng.next(), config.network_shape);
        for (Index i = 0; i < params.fc2.weight.size(); ++i)
            params.fc2.weight.data()[i] = rng.next_in(-0.5, 0.5);
        config.master_seed = 1000 + static_cast<std::uint64_t>(trial);

        const InferenceResult result =
            infer_best_edit(img, {"red", std::nullopt}, params, mocks.set(), config);
        require(result.winner_index == brute_force_winner(result.candidates),
                "inference winner differs from brute force on trial " +
                    std::to_string(trial));
        require(result.winner.anchor_index ==
                    result.candidates[static_cast<std::size_t>(result.winner_index)]
                        .anchor_index,
                "winner copy does not match the winning candidate");
    }

    // Quantized synthetic score sets force ties; the lowest anchor index must win.
    int ties_seen = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const Index n = 2 + static_cast<Index>(rng.next() % 7);
        std::vector<EditCandidate> candidates(static_cast<std::size_t>(n));
        for (Index i = 0; i < n; ++i) {
            auto& c = candidates[static_cast<std::size_t>(i)];
            c.anchor_index = i;
            c.failed = rng.next() % 10 < 3;
            c.score.s_t2i = std::floor(rng.next_in(0.0, 3.0)) * 0.25;
            c.score.s_i2i = std::floor(rng.next_in(0.0, 3.0)) * 0.25;
            c.score.s = 2.0 * c.score.s_t2i + 1.0 * c.score.s_i2i;
        }
        bool any_ok = false;
        for (const auto& c : candidates) any_ok = any_ok || !c.failed;
        if (!any_ok) {
            try {
                (void)pick_winner(candidates);
                fail("pick_winner accepted an all-failed candidate set");
            } catch (const BackendError&) {
            }
            continue;
        }
        const Index want = brute_force_winner(candidates);
        const Index got = pick_winner(candidates);
        require(got == want, "tie-break mismatch: picked " + std::to_string(got) +
                                 ", brute force says " + std::to_string(want));
        for (Index i = 0; i < n; ++i)
            if (i != want && !candidates[static_cast<std::size_t>(i)].failed &&
                candidates[static_cast<std::size_t>(i)].score.s ==
                    candidates[static_cast<std::size_t>(want)].score.s)
                ++ties_seen;
    }
    require(ties_seen > 0, "tie coverage: no tied scores were generated");

    return "50 inference runs match brute force; lowest-index tie rule held on " +
           std::to_string(ties_seen) + " tied candidates";
}

// --- criteria 7 and 8 drive the CLI binary ---------------------------------

int run_cli_binary(const std::string& cli, const std::string& args,
                   const std::string& log_path) {
    const std::string command = cli + " " + args + " > " + log_path + " 2>&1";
    return std::system(command.c_str());
}

ImageBuffer two_block_image() {
    ImageBuffer img = ImageBuffer::filled(64, 64, 0.2, 0.3, 0.4);
    img.plane[0].block(16, 16, 16, 16).setConstant(0.9);
    img.plane[1].block(16, 16, 16, 16).setConstant(0.2);
    img.plane[2].block(16, 16, 16, 16).setConstant(0.1);
    img.plane[0].block(32, 48, 16, 16).setConstant(0.1);
    img.plane[1].block(32, 48, 16, 16).setConstant(0.8);
    img.plane[2].block(32, 48, 16, 16).setConstant(0.2);
    return img;
}

std::string check_cli_determinism(const std::string& cli) {
    testutil::TempDir tmp;
    const std::string image = tmp.file("input.png");
    cli::save_png(image, two_block_image());

    for (const char* dir : {"run1", "run2"}) {
        fs::create_directories(tmp.file(dir));
        const std::string args = "edit " + image +
                                 " red --seed 3 --anchors 2 --proposals 2 "
                                 "--epochs 1 --no-cache --out " +
                                 tmp.file(dir);
        const int rc = run_cli_binary(cli, args, tmp.file(std::string(dir) + ".log"));
        require(rc == 0, std::string("edit run in ") + dir + " exited with " +
                             std::to_string(rc) + "; see " +
                             read_text_file(tmp.file(std::string(dir) + ".log")));
    }

    for (const char* name : {"edited.png", "winner.json", "training_log.jsonl"}) {
        require(read_text_file(tmp.file(std::string("run1/") + name)) ==
                    read_text_file(tmp.file(std::string("run2/") + name)),
                std::string(name) + " differs between identical runs");
    }
    return "two equal-seed edit runs produced byte-identical image, sidecar, "
           "and training log";
}

std::vector<double> csv_column(const std::string& csv, std::size_t column,
                               std::vector<std::string>* methods,
                               std::vector<long>* failed) {
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);  // header
    std::vector<double> values;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::istringstream row(line);
        std::string field;
        while (std::getline(row, field, ',')) fields.push_back(field);
        require(fields.size() == 5, "unexpected CSV row: " + line);
        methods->push_back(fields[0]);
        values.push_back(std::stod(fields[column]));
        failed->push_back(std::stol(fields[4]));
    }
    return values;
}

std::string check_eval_trend(const std::string& cli) {
    testutil::TempDir tmp;
    cli::save_png(tmp.file("scene.png"), testutil::scenario_image());
    write_text_file(tmp.file("manifest.json"),
                    "{\"items\": [{\"image\": \"scene.png\", \"prompt\": \"red\", "
                    "\"roi_text\": \"green\"}]}\n");
    fs::create_directories(tmp.file("out"));

    const std::string args = "eval " + tmp.file("manifest.json") +
                             " --methods ours-m1,ours-m3,ours-m7 --seed 11 "
                             "--jobs 1 --cache-dir " +
                             tmp.file("cache") + " --out " + tmp.file("out");
    const int rc = run_cli_binary(cli, args, tmp.file("eval.log"));
    require(rc == 0, "eval exited with " + std::to_string(rc) + "; see " +
                         read_text_file(tmp.file("eval.log")));

    std::vector<std::string> methods;
    std::vector<long> failed;
    const std::vector<double> s_t2i =
        csv_column(read_text_file(tmp.file("out/eval.csv")), 1, &methods, &failed);
    require(methods ==
                std::vector<std::string>({"ours-m1", "ours-m3", "ours-m7"}),
            "unexpected method rows in eval.csv");
    for (long n : failed) require(n == 0, "an eval item failed");
    require(s_t2i[0] <= s_t2i[1] && s_t2i[1] <= s_t2i[2],
            "prompt alignment not non-decreasing: " + fmt(s_t2i[0]) + ", " +
                fmt(s_t2i[1]) + ", " + fmt(s_t2i[2]));
    return "mean prompt alignment over proposal counts 1, 3, 7: " +
           fmt(s_t2i[0]) + " <= " + fmt(s_t2i[1]) + " <= " + fmt(s_t2i[2]);
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: acceptance <path-to-cli-binary>\n";
        return 2;
    }
    const std::string cli = argv[1];

    // Keep any cache traffic from CLI-driven criteria inside a temp root.
    testutil::TempDir cache_root;
    setenv("REGIONEDIT_CACHE_DIR", cache_root.file("cache").c_str(), 1);

    struct Criterion {
        int id;
        std::string name;
        std::function<std::string()> check;
    };
    const std::vector<Criterion> criteria = {
        {1, "hard Gumbel draws follow softmax frequencies",
         check_gumbel_max_frequencies},
        {2, "straight-through gradient matches central differences",
         check_straight_through_gradient},
        {3, "anchor selection, pooling, and self-similarity match oracles",
         check_oracle_equivalence},
        {4, "loss identities and ranges", check_loss_identities},
        {5, "training selects the enumerated optimal proposal",
         check_scenario_convergence},
        {6, "inference ranking equals brute force with lowest-index ties",
         check_inference_ranking},
        {7, "equal-seed CLI runs are byte-identical",
         [&] { return check_cli_determinism(cli); }},
        {8, "prompt alignment is non-decreasing over the proposal-count sweep",
         [&] { return check_eval_trend(cli); }},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        std::string verdict, detail;
        try {
            detail = criterion.check();
            verdict = "[PASS]";
        } catch (const std::exception& e) {
            detail = e.what();
            verdict = "[FAIL]";
            ++failures;
        }
        std::cout << verdict << " criterion " << criterion.id << ": "
                  << criterion.name << " (" << detail << ")\n";
    }
    std::cout << "[SKIP] criterion 9: real-backend trend check needs DINO, CLIP, "
                 "and a diffusion inpainter; docs/adapters.md describes the "
                 "adapter contract and how to run it\n";

    if (failures > 0) {
        std::cout << failures << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "all gated criteria passed\n";
    return 0;
}
