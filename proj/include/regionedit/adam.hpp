#pragma once

#include <cmath>

#include "regionedit/region_network.hpp"

namespace regionedit {

struct AdamConfig {
    double lr = 0.003;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Adam with bias correction over the region generator's eight tensors.
class AdamOptimizer {
public:
    AdamOptimizer(const RegionGeneratorParams& params, const AdamConfig& config)
        : config_(config) {
        init_like(m_, params);
        init_like(v_, params);
    }

    void step(RegionGeneratorParams& params, const RegionGeneratorGrads& grads) {
        ++t_;
        update(params.conv1.weight, grads.conv1.weight, m_.conv1.weight, v_.conv1.weight);
        update(params.conv1.bias, grads.conv1.bias, m_.conv1.bias, v_.conv1.bias);
        update(params.conv2.weight, grads.conv2.weight, m_.conv2.weight, v_.conv2.weight);
        update(params.conv2.bias, grads.conv2.bias, m_.conv2.bias, v_.conv2.bias);
        update(params.fc1.weight, grads.fc1.weight, m_.fc1.weight, v_.fc1.weight);
        update(params.fc1.bias, grads.fc1.bias, m_.fc1.bias, v_.fc1.bias);
        update(params.fc2.weight, grads.fc2.weight, m_.fc2.weight, v_.fc2.weight);
        update(params.fc2.bias, grads.fc2.bias, m_.fc2.bias, v_.fc2.bias);
    }

    long steps_taken() const { return t_; }

private:
    struct State {
        ConvLayer conv1, conv2;
        DenseLayer fc1, fc2;
    };

    static void init_like(State& s, const RegionGeneratorParams& p) {
        s.conv1.weight = MatX<double>::Zero(p.conv1.weight.rows(), p.conv1.weight.cols());
        s.conv1.bias = VecX<double>::Zero(p.conv1.bias.size());
        s.conv2.weight = MatX<double>::Zero(p.conv2.weight.rows(), p.conv2.weight.cols());
        s.conv2.bias = VecX<double>::Zero(p.conv2.bias.size());
        s.fc1.weight = MatX<double>::Zero(p.fc1.weight.rows(), p.fc1.weight.cols());
        s.fc1.bias = VecX<double>::Zero(p.fc1.bias.size());
        s.fc2.weight = MatX<double>::Zero(p.fc2.weight.rows(), p.fc2.weight.cols());
        s.fc2.bias = VecX<double>::Zero(p.fc2.bias.size());
    }

    template <typename Tensor>
    void update(Tensor& p, const Tensor& g, Tensor& m, Tensor& v) {
        m = config_.beta1 * m + (1.0 - config_.beta1) * g;
        v = (config_.beta2 * v.array() + (1.0 - config_.beta2) * g.array().square()).matrix();
        const double mc = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
        const double vc = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
        p.array() -=
            config_.lr * (m.array() / mc) / ((v.array() / vc).sqrt() + config_.eps);
    }

    AdamConfig config_;
    State m_, v_;
    long t_ = 0;
};

}  // namespace regionedit
