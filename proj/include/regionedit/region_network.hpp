#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "regionedit/roi_pool.hpp"
#include "regionedit/types.hpp"

namespace regionedit {

/// Layer widths of the region generation network. Defaults follow the
/// architecture descriptor recorded with every run: conv 3x3/pad1 to 256,
/// conv 3x3/pad1 to 128, then linear 256, linear M.
struct RegionNetworkShape {
    Index conv1_out = 256;
    Index conv2_out = 128;
    Index fc1_out = 256;
};

struct ConvLayer {
    MatX<double> weight;  // out_ch × (in_ch·9), 3×3 kernels flattened
    VecX<double> bias;    // out_ch
    Index in_ch = 0;
    Index out_ch = 0;
};

struct DenseLayer {
    MatX<double> weight;  // out × in
    VecX<double> bias;    // out
};

/// All learnable parameters of the proposal-scoring network plus the
/// architecture descriptor needed to rebuild it.
struct RegionGeneratorParams {
    ConvLayer conv1, conv2;
    DenseLayer fc1, fc2;
    Index input_channels = 0;  // M·d after channel concatenation
    Index l = 0;               // spatial side of the pooled input
    int M = 0;                 // logit count
    RegionNetworkShape shape;
    std::uint64_t init_seed = 0;

    Index parameter_count() const;
    void set_zero();
};

/// Gradients, same shapes as the parameters they belong to.
struct RegionGeneratorGrads {
    ConvLayer conv1, conv2;
    DenseLayer fc1, fc2;

    bool all_finite() const;
};

/// Activations kept by the cached forward pass for backprop.
struct RgnActivations {
    MatX<double> input;        // C_in × (l·l)
    MatX<double> col1, col2;   // im2col buffers
    MatX<double> pre1, act1;   // conv1 pre/post ReLU
    MatX<double> pre2, act2;   // conv2 pre/post ReLU
    VecX<double> flat;         // act2 flattened
    VecX<double> pre_fc1, act_fc1;
    VecX<double> logits;
};

/// Seeded uniform fan-in initialization, U(-1/sqrt(fan_in), 1/sqrt(fan_in))
/// from a SplitMix64 stream derived from `seed`, except the scoring head
/// (fc2) which starts at zero so the initial proposal distribution is
/// exactly uniform.
RegionGeneratorParams make_region_generator_params(
    int M, Index feature_dim, Index l, std::uint64_t seed,
    const RegionNetworkShape& shape = {});

/// Forward pass on a raw (M·d)×(l·l) input, keeping activations.
RgnActivations rgn_forward_cached(const RegionGeneratorParams& params,
                                  const MatX<double>& input);

/// Logits for one anchor's M pooled proposal features.
VecX<double> rgn_forward(const RegionGeneratorParams& params,
                         const std::vector<PooledFeature>& pooled);

/// Backprop of d(loss)/d(logits) through the cached forward pass.
RegionGeneratorGrads rgn_backward(const RegionGeneratorParams& params,
                                  const RgnActivations& acts,
                                  const VecX<double>& dlogits);

/// Binary blob with a JSON shape header; see docs in serialize.cpp.
void save_region_generator(const RegionGeneratorParams& params, std::ostream& out);
RegionGeneratorParams load_region_generator(std::istream& in);
void save_region_generator_file(const RegionGeneratorParams& params,
                                const std::string& path);
RegionGeneratorParams load_region_generator_file(const std::string& path);

}  // namespace regionedit
