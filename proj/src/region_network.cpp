#include "regionedit/region_network.hpp"

#include <fstream>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "regionedit/errors.hpp"
#include "regionedit/rng.hpp"

namespace regionedit {
namespace {

// im2col rows are laid out kernel-offset-major: row k·C + c holds the
// in-channel c value at kernel offset k = ky·3 + kx, so each offset is one
// contiguous block and conv weights address columns the same way.
MatX<double> im2col3x3(const MatX<double>& x, Index l) {
    const Index channels = x.rows();
    MatX<double> col = MatX<double>::Zero(channels * 9, l * l);
    for (Index ky = 0; ky < 3; ++ky)
        for (Index kx = 0; kx < 3; ++kx) {
            const Index k = ky * 3 + kx;
            for (Index by = 0; by < l; ++by) {
                const Index sy = by + ky - 1;
                if (sy < 0 || sy >= l) continue;
                for (Index bx = 0; bx < l; ++bx) {
                    const Index sx = bx + kx - 1;
                    if (sx < 0 || sx >= l) continue;
                    col.block(k * channels, by * l + bx, channels, 1) =
                        x.col(sy * l + sx);
                }
            }
        }
    return col;
}

MatX<double> col2im3x3(const MatX<double>& dcol, Index channels, Index l) {
    MatX<double> dx = MatX<double>::Zero(channels, l * l);
    for (Index ky = 0; ky < 3; ++ky)
        for (Index kx = 0; kx < 3; ++kx) {
            const Index k = ky * 3 + kx;
            for (Index by = 0; by < l; ++by) {
                const Index sy = by + ky - 1;
                if (sy < 0 || sy >= l) continue;
                for (Index bx = 0; bx < l; ++bx) {
                    const Index sx = bx + kx - 1;
                    if (sx < 0 || sx >= l) continue;
                    dx.col(sy * l + sx) +=
                        dcol.block(k * channels, by * l + bx, channels, 1);
                }
            }
        }
    return dx;
}

void init_uniform(MatX<double>& m, double bound, SplitMix64& rng) {
    for (Index j = 0; j < m.cols(); ++j)
        for (Index i = 0; i < m.rows(); ++i) m(i, j) = rng.next_in(-bound, bound);
}

void init_uniform(VecX<double>& v, double bound, SplitMix64& rng) {
    for (Index i = 0; i < v.size(); ++i) v(i) = rng.next_in(-bound, bound);
}

MatX<double> relu(const MatX<double>& m) { return m.cwiseMax(0.0); }

MatX<double> relu_backward(const MatX<double>& pre, const MatX<double>& dact) {
    return (pre.array() > 0.0).select(dact, MatX<double>::Zero(pre.rows(), pre.cols()));
}

}  // namespace

Index RegionGeneratorParams::parameter_count() const {
    return conv1.weight.size() + conv1.bias.size() + conv2.weight.size() +
           conv2.bias.size() + fc1.weight.size() + fc1.bias.size() +
           fc2.weight.size() + fc2.bias.size();
}

void RegionGeneratorParams::set_zero() {
    conv1.weight.setZero();
    conv1.bias.setZero();
    conv2.weight.setZero();
    conv2.bias.setZero();
    fc1.weight.setZero();
    fc1.bias.setZero();
    fc2.weight.setZero();
    fc2.bias.setZero();
}

bool RegionGeneratorGrads::all_finite() const {
    return conv1.weight.allFinite() && conv1.bias.allFinite() &&
           conv2.weight.allFinite() && conv2.bias.allFinite() &&
           fc1.weight.allFinite() && fc1.bias.allFinite() &&
           fc2.weight.allFinite() && fc2.bias.allFinite();
}

RegionGeneratorParams make_region_generator_params(int M, Index feature_dim,
                                                   Index l, std::uint64_t seed,
                                                   const RegionNetworkShape& shape) {
    if (M < 1 || feature_dim < 1 || l < 1)
        throw std::invalid_argument("make_region_generator_params: M, d, l must be >= 1");
    if (shape.conv1_out < 1 || shape.conv2_out < 1 || shape.fc1_out < 1)
        throw std::invalid_argument("make_region_generator_params: layer widths must be >= 1");
    RegionGeneratorParams p;
    p.M = M;
    p.input_channels = static_cast<Index>(M) * feature_dim;
    p.l = l;
    p.shape = shape;
    p.init_seed = seed;

    p.conv1.in_ch = p.input_channels;
    p.conv1.out_ch = shape.conv1_out;
    p.conv1.weight.resize(p.conv1.out_ch, p.conv1.in_ch * 9);
    p.conv1.bias.resize(p.conv1.out_ch);
    p.conv2.in_ch = shape.conv1_out;
    p.conv2.out_ch = shape.conv2_out;
    p.conv2.weight.resize(p.conv2.out_ch, p.conv2.in_ch * 9);
    p.conv2.bias.resize(p.conv2.out_ch);
    const Index flat_dim = shape.conv2_out * l * l;
    p.fc1.weight.resize(shape.fc1_out, flat_dim);
    p.fc1.bias.resize(shape.fc1_out);
    p.fc2.weight.resize(M, shape.fc1_out);
    p.fc2.bias.resize(M);

    SplitMix64 rng(derive_seed(seed, "region-generator-init"));
    const double b1 = 1.0 / std::sqrt(static_cast<double>(p.conv1.in_ch * 9));
    init_uniform(p.conv1.weight, b1, rng);
    init_uniform(p.conv1.bias, b1, rng);
    const double b2 = 1.0 / std::sqrt(static_cast<double>(p.conv2.in_ch * 9));
    init_uniform(p.conv2.weight, b2, rng);
    init_uniform(p.conv2.bias, b2, rng);
    const double b3 = 1.0 / std::sqrt(static_cast<double>(flat_dim));
    init_uniform(p.fc1.weight, b3, rng);
    init_uniform(p.fc1.bias, b3, rng);
    // The scoring head starts at zero so the initial proposal distribution
    // is exactly uniform; per-sample training then separates sizes purely
    // by measured loss instead of by an arbitrary initial preference.
    p.fc2.weight.setZero();
    p.fc2.bias.setZero();
    return p;
}

RgnActivations rgn_forward_cached(const RegionGeneratorParams& params,
                                  const MatX<double>& input) {
    if (input.rows() != params.input_channels ||
        input.cols() != params.l * params.l)
        throw std::invalid_argument("rgn_forward: input shape mismatch");
    RgnActivations a;
    a.input = input;
    a.col1 = im2col3x3(input, params.l);
    a.pre1 = params.conv1.weight * a.col1;
    a.pre1.colwise() += params.conv1.bias;
    a.act1 = relu(a.pre1);
    a.col2 = im2col3x3(a.act1, params.l);
    a.pre2 = params.conv2.weight * a.col2;
    a.pre2.colwise() += params.conv2.bias;
    a.act2 = relu(a.pre2);
    a.flat = Eigen::Map<const VecX<double>>(a.act2.data(), a.act2.size());
    a.pre_fc1 = params.fc1.weight * a.flat + params.fc1.bias;
    a.act_fc1 = a.pre_fc1.cwiseMax(0.0);
    a.logits = params.fc2.weight * a.act_fc1 + params.fc2.bias;
    if (!a.logits.allFinite())
        throw std::runtime_error("rgn_forward: non-finite logits");
    return a;
}

VecX<double> rgn_forward(const RegionGeneratorParams& params,
                         const std::vector<PooledFeature>& pooled) {
    if (static_cast<int>(pooled.size()) != params.M)
        throw std::invalid_argument("rgn_forward: expected M pooled features");
    for (const auto& p : pooled)
        if (p.l != params.l)
            throw std::invalid_argument("rgn_forward: pooled spatial side mismatch");
    return rgn_forward_cached(params, concat_pooled(pooled)).logits;
}

RegionGeneratorGrads rgn_backward(const RegionGeneratorParams& params,
                                  const RgnActivations& acts,
                                  const VecX<double>& dlogits) {
    if (dlogits.size() != params.M)
        throw std::invalid_argument("rgn_backward: dlogits size mismatch");
    RegionGeneratorGrads g;

    g.fc2.weight = dlogits * acts.act_fc1.transpose();
    g.fc2.bias = dlogits;
    VecX<double> dact_fc1 = params.fc2.weight.transpose() * dlogits;
    VecX<double> dpre_fc1 =
        (acts.pre_fc1.array() > 0.0).select(dact_fc1, VecX<double>::Zero(dact_fc1.size()));

    g.fc1.weight = dpre_fc1 * acts.flat.transpose();
    g.fc1.bias = dpre_fc1;
    VecX<double> dflat = params.fc1.weight.transpose() * dpre_fc1;
    MatX<double> dact2 =
        Eigen::Map<const MatX<double>>(dflat.data(), acts.act2.rows(), acts.act2.cols());

    MatX<double> dpre2 = relu_backward(acts.pre2, dact2);
    g.conv2.weight = dpre2 * acts.col2.transpose();
    g.conv2.bias = dpre2.rowwise().sum();
    g.conv2.in_ch = params.conv2.in_ch;
    g.conv2.out_ch = params.conv2.out_ch;
    MatX<double> dcol2 = params.conv2.weight.transpose() * dpre2;
    MatX<double> dact1 = col2im3x3(dcol2, params.conv2.in_ch, params.l);

    MatX<double> dpre1 = relu_backward(acts.pre1, dact1);
    g.conv1.weight = dpre1 * acts.col1.transpose();
    g.conv1.bias = dpre1.rowwise().sum();
    g.conv1.in_ch = params.conv1.in_ch;
    g.conv1.out_ch = params.conv1.out_ch;
    return g;
}

void save_region_generator(const RegionGeneratorParams& params, std::ostream& out) {
    nlohmann::ordered_json header{
        {"format", "region-generator-params"},
        {"version", 1},
        {"byte_order", "little-endian"},
        {"M", params.M},
        {"input_channels", params.input_channels},
        {"l", params.l},
        {"conv1_out", params.shape.conv1_out},
        {"conv2_out", params.shape.conv2_out},
        {"fc1_out", params.shape.fc1_out},
        {"init_seed", params.init_seed},
        {"doubles", params.parameter_count()},
    };
    const std::string htext = header.dump();
    const char magic[4] = {'R', 'G', 'N', '1'};
    out.write(magic, 4);
    const std::uint64_t hlen = htext.size();
    out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
    out.write(htext.data(), static_cast<std::streamsize>(htext.size()));
    auto dump = [&out](const auto& tensor) {
        out.write(reinterpret_cast<const char*>(tensor.data()),
                  static_cast<std::streamsize>(sizeof(double) * tensor.size()));
    };
    dump(params.conv1.weight);
    dump(params.conv1.bias);
    dump(params.conv2.weight);
    dump(params.conv2.bias);
    dump(params.fc1.weight);
    dump(params.fc1.bias);
    dump(params.fc2.weight);
    dump(params.fc2.bias);
    if (!out) throw IoError("save_region_generator: write failed");
}

RegionGeneratorParams load_region_generator(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::string_view(magic, 4) != "RGN1")
        throw IoError("load_region_generator: bad magic");
    std::uint64_t hlen = 0;
    in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
    if (!in || hlen == 0 || hlen > (1u << 20))
        throw IoError("load_region_generator: bad header length");
    std::string htext(hlen, '\0');
    in.read(htext.data(), static_cast<std::streamsize>(hlen));
    if (!in) throw IoError("load_region_generator: truncated header");
    nlohmann::json header = nlohmann::json::parse(htext, nullptr, false);
    if (header.is_discarded() ||
        header.value("format", "") != "region-generator-params")
        throw IoError("load_region_generator: unrecognized header");

    RegionNetworkShape shape{header.at("conv1_out").get<Index>(),
                             header.at("conv2_out").get<Index>(),
                             header.at("fc1_out").get<Index>()};
    const int M = header.at("M").get<int>();
    const Index input_channels = header.at("input_channels").get<Index>();
    const Index l = header.at("l").get<Index>();
    if (M < 1 || input_channels < 1 || l < 1 || input_channels % M != 0)
        throw IoError("load_region_generator: inconsistent shape header");
    RegionGeneratorParams p = make_region_generator_params(
        M, input_channels / M, l, header.value("init_seed", std::uint64_t{0}), shape);
    if (p.parameter_count() != header.at("doubles").get<Index>())
        throw IoError("load_region_generator: parameter count mismatch");
    auto slurp = [&in](auto& tensor) {
        in.read(reinterpret_cast<char*>(tensor.data()),
                static_cast<std::streamsize>(sizeof(double) * tensor.size()));
    };
    slurp(p.conv1.weight);
    slurp(p.conv1.bias);
    slurp(p.conv2.weight);
    slurp(p.conv2.bias);
    slurp(p.fc1.weight);
    slurp(p.fc1.bias);
    slurp(p.fc2.weight);
    slurp(p.fc2.bias);
    if (!in) throw IoError("load_region_generator: truncated payload");
    if (!RegionGeneratorGrads{p.conv1, p.conv2, p.fc1, p.fc2}.all_finite())
        throw IoError("load_region_generator: non-finite parameters");
    return p;
}

void save_region_generator_file(const RegionGeneratorParams& params,
                                const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    save_region_generator(params, out);
}

RegionGeneratorParams load_region_generator_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    return load_region_generator(in);
}

}  // namespace regionedit
