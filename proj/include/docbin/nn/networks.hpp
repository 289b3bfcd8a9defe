#ifndef DOCBIN_NN_NETWORKS_HPP
#define DOCBIN_NN_NETWORKS_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "docbin/core/random.hpp"
#include "docbin/nn/autograd.hpp"

namespace docbin::nn {

enum class NetRole { generator, discriminator };

inline const char* to_string(NetRole r) { return r == NetRole::generator ? "generator" : "discriminator"; }

/// Named parameter tensors of one network. Names are unique and shapes are
/// fixed once the network is built.
struct NetParams {
    NetRole role = NetRole::generator;
    std::vector<std::string> names;
    std::vector<Tensor> tensors;

    void add(std::string name, Tensor t) {
        for (const auto& n : names) {
            if (n == name) throw Error(ErrorCode::invalid_argument, "duplicate parameter " + name);
        }
        names.push_back(std::move(name));
        tensors.push_back(std::move(t));
    }

    std::size_t count() const {
        std::size_t n = 0;
        for (const auto& t : tensors) n += t.numel();
        return n;
    }

    friend bool operator==(const NetParams&, const NetParams&) = default;
};

/// Parameters placed on a tape, in the same order as NetParams.
struct BoundParams {
    std::vector<Var> vars;
    const Var& operator[](std::size_t i) const { return vars[i]; }
};

inline BoundParams bind(Tape& tape, const NetParams& p, bool trainable) {
    BoundParams b;
    b.vars.reserve(p.tensors.size());
    for (std::size_t i = 0; i < p.tensors.size(); ++i) b.vars.push_back(tape.leaf(p.tensors[i], trainable, p.names[i]));
    return b;
}

inline constexpr double kLeakySlope = 0.2;

namespace detail {
/// Kaiming-uniform initialisation for leaky-ReLU layers; biases start at zero.
inline void add_conv(NetParams& p, Rng& rng, const std::string& name, int out_c, int in_c, int k, double gain) {
    Tensor w(Shape{out_c, in_c, k, k});
    const double bound = gain * std::sqrt(3.0 / (static_cast<double>(in_c) * k * k));
    for (double& v : w.data) v = rng.uniform(-bound, bound);
    p.add(name + ".w", std::move(w));
    p.add(name + ".b", Tensor(Shape{1, out_c, 1, 1}, 0.0));
}
inline double leaky_gain() { return std::sqrt(2.0 / (1.0 + kLeakySlope * kLeakySlope)); }
}  // namespace detail

struct GeneratorConfig {
    int in_channels = 1;
    int widths[3] = {16, 32, 64};
};

/// Small U-shaped generator: three stride-2 encoder levels, a mirrored
/// nearest-upsample decoder with skip concatenations, and a 1x1 sigmoid
/// head producing one channel in (0,1). Fully convolutional for any input
/// whose height and width are divisible by 8.
class Generator {
public:
    Generator() = default;
    explicit Generator(GeneratorConfig cfg) : cfg_(cfg) {
        if (cfg.in_channels != 1 && cfg.in_channels != 3) {
            throw Error(ErrorCode::invalid_argument, "generator input must have 1 or 3 channels");
        }
    }

    const GeneratorConfig& config() const { return cfg_; }

    NetParams init(std::uint64_t seed) const {
        Rng rng(seed);
        NetParams p;
        p.role = NetRole::generator;
        const int* w = cfg_.widths;
        const double g = detail::leaky_gain();
        detail::add_conv(p, rng, "enc1", w[0], cfg_.in_channels, 3, g);
        detail::add_conv(p, rng, "enc2", w[1], w[0], 3, g);
        detail::add_conv(p, rng, "enc3", w[2], w[1], 3, g);
        detail::add_conv(p, rng, "dec2", w[1], w[2] + w[1], 3, g);
        detail::add_conv(p, rng, "dec1", w[0], w[1] + w[0], 3, g);
        detail::add_conv(p, rng, "dec0", w[0], w[0] + cfg_.in_channels, 3, g);
        detail::add_conv(p, rng, "head", 1, w[0], 1, 1.0);
        return p;
    }

    Var forward(const BoundParams& p, Var x) const {
        using namespace ops;
        const Shape s = x.shape();
        if (s.c != cfg_.in_channels) {
            throw Error(ErrorCode::shape_mismatch, "generator expects " + std::to_string(cfg_.in_channels) +
                                                       " input channels, got " + s.str());
        }
        if (s.h % 8 || s.w % 8) {
            throw Error(ErrorCode::shape_mismatch, "generator input extents must be divisible by 8, got " + s.str());
        }
        Var e1 = leaky_relu(conv2d(x, p[0], p[1], 2, 1), kLeakySlope);
        Var e2 = leaky_relu(conv2d(e1, p[2], p[3], 2, 1), kLeakySlope);
        Var e3 = leaky_relu(conv2d(e2, p[4], p[5], 2, 1), kLeakySlope);
        Var d2 = leaky_relu(conv2d(concat_channels({upsample2(e3), e2}), p[6], p[7], 1, 1), kLeakySlope);
        Var d1 = leaky_relu(conv2d(concat_channels({upsample2(d2), e1}), p[8], p[9], 1, 1), kLeakySlope);
        Var d0 = leaky_relu(conv2d(concat_channels({upsample2(d1), x}), p[10], p[11], 1, 1), kLeakySlope);
        return sigmoid(conv2d(d0, p[12], p[13], 1, 0));
    }

private:
    GeneratorConfig cfg_;
};

struct DiscriminatorConfig {
    int widths[3] = {16, 32, 64};
};

/// Conditional critic. The single-channel candidate is replicated to three
/// channels and concatenated with a three-channel condition (single-channel
/// conditions are replicated too): six input channels, four stride-2
/// convolutions with leaky ReLU and no normalisation, then a global mean to
/// one score per sample. Piecewise linear in its inputs.
class Discriminator {
public:
    Discriminator() = default;
    explicit Discriminator(DiscriminatorConfig cfg) : cfg_(cfg) {}

    NetParams init(std::uint64_t seed) const {
        Rng rng(seed);
        NetParams p;
        p.role = NetRole::discriminator;
        const int* w = cfg_.widths;
        const double g = detail::leaky_gain();
        detail::add_conv(p, rng, "conv1", w[0], 6, 3, g);
        detail::add_conv(p, rng, "conv2", w[1], w[0], 3, g);
        detail::add_conv(p, rng, "conv3", w[2], w[1], 3, g);
        detail::add_conv(p, rng, "conv4", 1, w[2], 3, 1.0);
        return p;
    }

    static Var pair_input(Var candidate, Var condition) {
        using namespace ops;
        const Shape cs = candidate.shape(), xs = condition.shape();
        if (cs.c != 1) throw Error(ErrorCode::shape_mismatch, "critic candidate must be single-channel, got " + cs.str());
        if (xs.c != 1 && xs.c != 3) {
            throw Error(ErrorCode::shape_mismatch, "critic condition must have 1 or 3 channels, got " + xs.str());
        }
        if (cs.n != xs.n || cs.h != xs.h || cs.w != xs.w) {
            throw Error(ErrorCode::shape_mismatch, "critic candidate " + cs.str() + " vs condition " + xs.str());
        }
        Var cond = xs.c == 1 ? replicate_channels(condition, 3) : condition;
        return concat_channels({replicate_channels(candidate, 3), cond});
    }

    /// Scores of shape (N,1,1,1).
    Var forward(const BoundParams& p, Var candidate, Var condition) const {
        using namespace ops;
        Var h = pair_input(candidate, condition);
        h = leaky_relu(conv2d(h, p[0], p[1], 2, 1), kLeakySlope);
        h = leaky_relu(conv2d(h, p[2], p[3], 2, 1), kLeakySlope);
        h = leaky_relu(conv2d(h, p[4], p[5], 2, 1), kLeakySlope);
        h = conv2d(h, p[6], p[7], 2, 1);
        return global_mean(h);
    }

private:
    DiscriminatorConfig cfg_;
};

}  // namespace docbin::nn

#endif  // DOCBIN_NN_NETWORKS_HPP
