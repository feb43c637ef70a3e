#include <doctest.h>

#include <cmath>

#include "regionedit/trainer.hpp"
#include "testutil/oracles.hpp"
#include "testutil/scenario.hpp"

using namespace regionedit;

namespace {

TrainConfig tiny_config() {
    TrainConfig c;
    c.K = 2;
    c.M = 2;
    c.l = 3;
    c.epochs = 1;
    c.master_seed = 77;
    c.network_shape = {6, 4, 8};
    return c;
}

}  // namespace

TEST_SUITE("trainer") {

TEST_CASE("zero epochs leaves the fresh initialization untouched") {
    auto mocks = make_mock_backends(31, 8);
    const ImageBuffer img = ImageBuffer::filled(64, 64, 0.4, 0.5, 0.6);
    TrainConfig config = tiny_config();
    config.epochs = 0;
    const auto result =
        train_region_generator(img, {"red", std::nullopt}, mocks.set(), config);
    const auto fresh = make_region_generator_params(
        config.M, 8, config.l, derive_seed(config.master_seed, "region-generator"),
        config.network_shape);
    CHECK(result.params.conv1.weight == fresh.conv1.weight);
    CHECK(result.params.conv2.weight == fresh.conv2.weight);
    CHECK(result.params.fc1.weight == fresh.fc1.weight);
    CHECK(result.params.fc2.weight.cwiseAbs().maxCoeff() == 0.0);
    CHECK(result.log.steps.empty());
    CHECK(result.anchors.size() == 2);
    CHECK(result.grid_h == 4);
    CHECK(result.patch_stride == 16);
    CHECK(mocks.editor->stats().calls() == 0);
}

TEST_CASE("straight-through gradient has the closed form on a two-way tie") {
    VecX<double> logits = VecX<double>::Zero(2);
    VecX<double> gumbel = VecX<double>::Zero(2);
    const SelectionSample s = selection_from_noise(logits, gumbel);
    CHECK(s.j_star == 1);  // argmax tie resolves to the first entry
    CHECK(s.soft_weights(0) == doctest::Approx(0.5).epsilon(1e-15));

    VecX<double> losses(2);
    losses << 0.0, 1.0;
    CHECK(surrogate_value(s, losses) == doctest::Approx(0.5).epsilon(1e-15));
    const VecX<double> grad = surrogate_grad_logits(s, losses);
    CHECK(grad(0) == doctest::Approx(-0.25).epsilon(1e-12));
    CHECK(grad(1) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("selection gradient matches finite differences through the network") {
    SplitMix64 rng(0x5743u);
    auto params = make_region_generator_params(3, 2, 3, 0x5743, {4, 3, 5});
    for (Index i = 0; i < params.fc2.weight.rows(); ++i)
        for (Index j = 0; j < params.fc2.weight.cols(); ++j)
            params.fc2.weight(i, j) = rng.next_unit() - 0.5;

    MatX<double> input(6, 9);
    for (Index i = 0; i < input.rows(); ++i)
        for (Index j = 0; j < input.cols(); ++j)
            input(i, j) = rng.next_unit() * 2.0 - 1.0;

    VecX<double> gumbel(3);
    gumbel << 0.3, -0.2, 0.5;
    VecX<double> losses(3);
    losses << 0.8, 0.1, 0.4;

    // Objective: the straight-through surrogate as a function of the
    // parameters, with noise and per-proposal losses held fixed.
    auto objective = [&]() {
        const auto acts = rgn_forward_cached(params, input);
        return surrogate_value(selection_from_noise(acts.logits, gumbel), losses);
    };

    const auto acts = rgn_forward_cached(params, input);
    REQUIRE(acts.pre1.cwiseAbs().minCoeff() > 1e-4);
    REQUIRE(acts.pre2.cwiseAbs().minCoeff() > 1e-4);
    REQUIRE(acts.pre_fc1.cwiseAbs().minCoeff() > 1e-4);
    const auto sample = selection_from_noise(acts.logits, gumbel);
    const VecX<double> dlogits = surrogate_grad_logits(sample, losses);
    const auto grads = rgn_backward(params, acts, dlogits);

    auto check_entry = [&](MatX<double>& tensor, const MatX<double>& grad,
                           Index i, Index j) {
        const double fd = testutil::finite_difference(objective, tensor, i, j);
        CHECK(grad(i, j) == doctest::Approx(fd).epsilon(1e-4).scale(1.0));
    };
    check_entry(params.conv1.weight, grads.conv1.weight, 0, 3);
    check_entry(params.conv2.weight, grads.conv2.weight, 1, 7);
    check_entry(params.fc1.weight, grads.fc1.weight, 2, 11);
    check_entry(params.fc2.weight, grads.fc2.weight, 1, 2);
    VecX<double>& fb = params.fc1.bias;
    const double fd = testutil::finite_difference(objective, fb, 1, 0);
    CHECK(grads.fc1.bias(1) == doctest::Approx(fd).epsilon(1e-4).scale(1.0));
}

TEST_CASE("surrogate_step returns the logit gradient and takes one Adam step") {
    SplitMix64 rng(0xADA0u);
    auto params = make_region_generator_params(3, 2, 3, 0xADA0, {4, 3, 5});
    auto reference = params;

    MatX<double> input(6, 9);
    for (Index i = 0; i < input.rows(); ++i)
        for (Index j = 0; j < input.cols(); ++j)
            input(i, j) = rng.next_unit() * 2.0 - 1.0;
    VecX<double> gumbel(3);
    gumbel << 0.1, 0.9, -0.4;
    VecX<double> losses(3);
    losses << 0.3, 0.6, 0.2;

    const auto acts = rgn_forward_cached(reference, input);
    const auto sample = selection_from_noise(acts.logits, gumbel);

    AdamOptimizer opt(params, {0.01, 0.9, 0.999, 1e-8});
    const VecX<double> dlogits = surrogate_step(params, opt, input, sample, losses);
    CHECK(dlogits == surrogate_grad_logits(sample, losses));
    CHECK(opt.steps_taken() == 1);

    // Replay the same update by hand on the untouched copy.
    const auto ref_grads =
        rgn_backward(reference, rgn_forward_cached(reference, input), dlogits);
    AdamOptimizer ref_opt(reference, {0.01, 0.9, 0.999, 1e-8});
    ref_opt.step(reference, ref_grads);
    CHECK(params.conv1.weight == reference.conv1.weight);
    CHECK(params.conv2.weight == reference.conv2.weight);
    CHECK(params.fc1.weight == reference.fc1.weight);
    CHECK(params.fc2.weight == reference.fc2.weight);
    CHECK(params.fc2.bias == reference.fc2.bias);
}

TEST_CASE("equal seeds reproduce the training log, different seeds do not") {
    auto s1 = testutil::make_scenario();
    s1.config.epochs = 2;
    s1.config.master_seed = 5;
    const auto r1 = train_region_generator(s1.image, s1.prompt, s1.set(), s1.config);

    auto s2 = testutil::make_scenario();
    s2.config.epochs = 2;
    s2.config.master_seed = 5;
    const auto r2 = train_region_generator(s2.image, s2.prompt, s2.set(), s2.config);

    REQUIRE(r1.log.steps.size() == r2.log.steps.size());
    for (std::size_t i = 0; i < r1.log.steps.size(); ++i) {
        const auto& a = r1.log.steps[i];
        const auto& b = r2.log.steps[i];
        CHECK(a.epoch == b.epoch);
        CHECK(a.anchor == b.anchor);
        CHECK(a.j_star == b.j_star);
        CHECK(a.seed == b.seed);
        CHECK(a.surrogate == b.surrogate);
        CHECK(a.soft_weights == b.soft_weights);
        CHECK(a.loss_parts.total == b.loss_parts.total);
    }
    CHECK(r1.params.fc2.weight == r2.params.fc2.weight);
    CHECK(r1.params.conv1.weight == r2.params.conv1.weight);

    auto s3 = testutil::make_scenario();
    s3.config.epochs = 2;
    s3.config.master_seed = 6;
    const auto r3 = train_region_generator(s3.image, s3.prompt, s3.set(), s3.config);
    CHECK(r1.log.steps[0].surrogate != r3.log.steps[0].surrogate);
}

TEST_CASE("sampled-ema seeds each anchor row with one full sweep") {
    auto s = testutil::make_scenario();
    s.config.epochs = 2;
    s.config.gradient_mode = GradientMode::kSampledEma;
    s.config.master_seed = 9;
    const auto result = train_region_generator(s.image, s.prompt, s.set(), s.config);

    REQUIRE(result.loss_table.visits.rows() == s.config.K);
    for (Index a = 0; a < s.config.K; ++a) {
        // Epoch 0 swept all M proposals; epoch 1 refreshed exactly one.
        CHECK(result.loss_table.visits.row(a).minCoeff() >= 1);
        CHECK(result.loss_table.visits.row(a).sum() == s.config.M + 1);
    }
    CHECK(result.loss_table.ema.allFinite());
    CHECK(result.loss_table.ema.minCoeff() > 0.0);
}

TEST_CASE("retryable editor failures are retried, fatal ones skip the step") {
    const ImageBuffer img = ImageBuffer::filled(64, 64, 0.4, 0.5, 0.6);
    const PromptSpec prompt{"red", std::nullopt};

    SUBCASE("retryable failures within the budget do not lose the step") {
        auto mocks = make_mock_backends(32, 8);
        TrainConfig config = tiny_config();
        config.K = 1;
        mocks.editor->stats().fail_next(2, true);
        const auto result = train_region_generator(img, prompt, mocks.set(), config);
        REQUIRE(result.log.steps.size() == 1);
        CHECK_FALSE(result.log.steps[0].skipped);
        // Two failed attempts are uncounted; both proposals edited once.
        CHECK(mocks.editor->stats().calls() == 2);
    }

    SUBCASE("a fatal failure skips the step but training continues") {
        auto mocks = make_mock_backends(32, 8);
        TrainConfig config = tiny_config();
        config.epochs = 2;
        mocks.editor->stats().fail_next(1, false);
        const auto result = train_region_generator(img, prompt, mocks.set(), config);
        REQUIRE(result.log.steps.size() == 4);
        CHECK(result.log.steps[0].skipped);
        CHECK(result.log.steps[0].skip_reason.find("injected failure") !=
              std::string::npos);
        CHECK_FALSE(result.log.steps[1].skipped);
        CHECK_FALSE(result.log.steps[3].skipped);
    }

    SUBCASE("training aborts when every step is lost") {
        auto mocks = make_mock_backends(32, 8);
        TrainConfig config = tiny_config();
        mocks.editor->stats().fail_next(2, false);  // one per step, K=2 steps
        CHECK_THROWS_AS(train_region_generator(img, prompt, mocks.set(), config),
                        BackendError);
    }
}

TEST_CASE("config validation rejects out-of-range fields") {
    TrainConfig config = tiny_config();
    config.K = 0;
    CHECK_THROWS_AS(validate_train_config(config), std::invalid_argument);
    config = tiny_config();
    config.learning_rate = 0.0;
    CHECK_THROWS_AS(validate_train_config(config), std::invalid_argument);
    config = tiny_config();
    config.ema_decay = 1.0;
    CHECK_THROWS_AS(validate_train_config(config), std::invalid_argument);
    config = tiny_config();
    config.weights.lambda_str = -0.5;
    CHECK_THROWS_AS(validate_train_config(config), std::invalid_argument);
    CHECK(gradient_mode_from_string("full-eval") == GradientMode::kFullEval);
    CHECK(gradient_mode_from_string("sampled-ema") == GradientMode::kSampledEma);
    CHECK_THROWS_AS(gradient_mode_from_string("exact"), std::invalid_argument);
    CHECK(to_string(GradientMode::kSampledEma) == "sampled-ema");
}

TEST_CASE("winner selection agrees with a brute-force scan") {
    SplitMix64 rng(0x313Bu);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + static_cast<int>(rng.next_below(12));
        std::vector<EditCandidate> candidates;
        bool any_ok = false;
        for (int i = 0; i < n; ++i) {
            EditCandidate c;
            c.anchor_index = i;
            c.failed = rng.next_unit() < 0.3;
            // Quantized scores force frequent exact ties.
            c.score.s = std::floor(rng.next_unit() * 4.0) / 4.0;
            any_ok = any_ok || !c.failed;
            candidates.push_back(std::move(c));
        }
        if (!any_ok) {
            CHECK_THROWS_AS(pick_winner(candidates), BackendError);
            continue;
        }
        Index expect = -1;
        double best = 0.0;
        for (Index i = 0; i < static_cast<Index>(candidates.size()); ++i) {
            const auto& c = candidates[static_cast<std::size_t>(i)];
            if (c.failed) continue;
            if (expect < 0 || c.score.s > best) {
                expect = i;
                best = c.score.s;
            }
        }
        CHECK(pick_winner(candidates) == expect);
    }
}

TEST_CASE("training on the constructed image converges to the enumerated optimum") {
    auto s = testutil::make_scenario();
    s.config.master_seed = 4;
    const int j_dagger = testutil::scenario_j_dagger(s);
    REQUIRE(j_dagger >= 1);

    const auto result = train_region_generator(s.image, s.prompt, s.set(), s.config);
    REQUIRE_FALSE(result.log.epochs.empty());
    const auto& final_softmax = result.log.epochs.back().softmax_per_anchor;
    for (Index a = 0; a < s.config.K; ++a) {
        const VecX<double> row = final_softmax.row(a).transpose();
        CHECK(static_cast<int>(argmax_lowest(row)) + 1 == j_dagger);
    }

    // The anchors must be the constructed block centers.
    REQUIRE(result.anchors.size() == testutil::scenario_block_centers().size());
    for (const auto& anchor : result.anchors) {
        bool found = false;
        for (const auto& [r, c] : testutil::scenario_block_centers())
            found = found || (anchor.row == r && anchor.col == c);
        CHECK(found);
    }

    // Noise-free inference then picks that size for its winner.
    const auto inference =
        infer_best_edit(s.image, s.prompt, result.params, s.set(), s.config);
    CHECK(inference.winner.box.size_index == j_dagger);
    CHECK_FALSE(inference.winner.failed);
    CHECK(inference.candidates.size() == static_cast<std::size_t>(s.config.K));
    CHECK(inference.winner_index == pick_winner(inference.candidates));
    const Index side = static_cast<Index>(j_dagger) * 16;
    CHECK(inference.winner.mask.ones_count() == side * side);
}

}  // TEST_SUITE
