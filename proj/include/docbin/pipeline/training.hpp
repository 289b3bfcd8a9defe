#ifndef DOCBIN_PIPELINE_TRAINING_HPP
#define DOCBIN_PIPELINE_TRAINING_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "docbin/core/random.hpp"
#include "docbin/dataset/patches.hpp"
#include "docbin/nn/adam.hpp"
#include "docbin/nn/loss.hpp"
#include "docbin/nn/networks.hpp"
#include "docbin/pipeline/stages.hpp"

namespace docbin {

struct StageConfig {
    int epochs_enhancement = 10;
    int epochs_binarization = 150;
    int batch_size = 4;
    std::uint64_t seed = 1;
    int patch_size = 224;
    int global_size = 512;
    nn::LossConfig loss;
    nn::AdamConfig adam;

    void validate() const {
        if (epochs_enhancement < 1 || epochs_binarization < 1 || batch_size < 1) {
            throw Error(ErrorCode::invalid_argument, "epochs and batch size must be positive");
        }
        if (patch_size < 8 || patch_size % 8 || global_size < 8 || global_size % 8) {
            throw Error(ErrorCode::invalid_argument, "patch and global sizes must be positive multiples of 8");
        }
        if (!(adam.lr > 0.0)) throw Error(ErrorCode::invalid_argument, "learning rate must be positive");
        loss.validate();
    }
};

/// Generator plus critic with their optimizer state.
struct AdversarialPair {
    nn::NetParams generator;
    nn::NetParams critic;
    nn::AdamState generator_state;
    nn::AdamState critic_state;
};

struct EnhancementBundle {
    std::array<nn::NetParams, kChannelCount> generators;  // red, green, blue, gray
    nn::NetParams discriminator;

    bool trained() const {
        for (const auto& g : generators) {
            if (g.tensors.empty()) return false;
        }
        return !discriminator.tensors.empty();
    }
};

struct BinarizationBundle {
    nn::NetParams local_generator;
    nn::NetParams local_discriminator;
    nn::NetParams global_generator;
    nn::NetParams global_discriminator;

    bool trained() const {
        return !local_generator.tensors.empty() && !local_discriminator.tensors.empty() &&
               !global_generator.tensors.empty() && !global_discriminator.tensors.empty();
    }
};

inline nn::Generator enhancement_generator() { return nn::Generator(nn::GeneratorConfig{1}); }
inline nn::Generator local_generator() { return nn::Generator(nn::GeneratorConfig{1}); }
inline nn::Generator global_generator() { return nn::Generator(nn::GeneratorConfig{3}); }

/// Epoch means for one generator and the critic updates paired with it.
struct LossRecord {
    std::string stage;
    std::string network;
    int epoch = 0;
    double d_loss = 0.0;
    double penalty = 0.0;
    double g_loss = 0.0;
    double bce = 0.0;
    long steps = 0;
};

struct TrainingLog {
    std::vector<LossRecord> history;
    long critic_updates = 0;
    long generator_updates = 0;
    std::function<void(const LossRecord&)> on_epoch;

    void push(LossRecord r) {
        if (on_epoch) on_epoch(r);
        history.push_back(std::move(r));
    }
};

/// One training pair: generator input, critic condition and target, each a
/// single-sample (1,C,H,W) tensor.
struct Sample {
    nn::Tensor input;
    nn::Tensor condition;
    nn::Tensor target;
};

inline nn::Tensor to_tensor(const Plane& p) { return nn::Tensor(nn::Shape{1, 1, p.height, p.width}, p.data); }

inline nn::Tensor to_tensor(const BinaryImage& b) { return to_tensor(to_plane(b)); }

/// Channel-planar RGB in [0,1].
inline nn::Tensor to_tensor(const RasterImage& img) {
    const RasterImage rgb = as_rgb(img);
    nn::Tensor t(nn::Shape{1, 3, rgb.height, rgb.width});
    const std::size_t n = static_cast<std::size_t>(rgb.width) * rgb.height;
    for (int c = 0; c < 3; ++c) {
        for (std::size_t i = 0; i < n; ++i) t.data[c * n + i] = rgb.data[3 * i + c] / 255.0;
    }
    return t;
}

inline Plane plane_of(const nn::Tensor& t, int n = 0) {
    Plane p(t.shape.w, t.shape.h);
    const auto first = t.data.begin() + static_cast<std::ptrdiff_t>(n * t.shape.sample_size());
    std::copy(first, first + static_cast<std::ptrdiff_t>(t.shape.plane_size()), p.data.begin());
    return p;
}

inline nn::Tensor stack(const std::vector<const nn::Tensor*>& parts) {
    nn::Shape s = parts.front()->shape;
    s.n = 0;
    std::vector<double> data;
    for (const nn::Tensor* t : parts) {
        if (t->shape.c != s.c || t->shape.h != s.h || t->shape.w != s.w) {
            throw Error(ErrorCode::shape_mismatch, "stack: " + t->shape.str() + " vs " + parts.front()->shape.str());
        }
        s.n += t->shape.n;
        data.insert(data.end(), t->data.begin(), t->data.end());
    }
    return nn::Tensor(s, std::move(data));
}

/// Forward pass with constant parameters, in batches of `batch`.
inline nn::Tensor generate(const nn::Generator& g, const nn::NetParams& params, const nn::Tensor& x, int batch = 4) {
    if (params.tensors.empty()) throw Error(ErrorCode::invalid_argument, "generator has no parameters");
    nn::Tensor out(nn::Shape{x.shape.n, 1, x.shape.h, x.shape.w});
    const std::size_t in_m = x.shape.sample_size(), out_m = out.shape.sample_size();
    for (int n0 = 0; n0 < x.shape.n; n0 += batch) {
        const int b = std::min(batch, x.shape.n - n0);
        nn::Shape s = x.shape;
        s.n = b;
        nn::Tape tape;
        const nn::BoundParams bound = nn::bind(tape, params, false);
        nn::Tensor chunk(s, std::vector<double>(x.data.begin() + static_cast<std::ptrdiff_t>(n0 * in_m),
                                                x.data.begin() + static_cast<std::ptrdiff_t>((n0 + b) * in_m)));
        const nn::Tensor& y = g.forward(bound, tape.constant(std::move(chunk))).value();
        std::copy(y.data.begin(), y.data.end(), out.data.begin() + static_cast<std::ptrdiff_t>(n0 * out_m));
    }
    return out;
}

namespace detail {

inline std::vector<nn::Tensor> values_of(const std::vector<nn::Var>& vars) {
    std::vector<nn::Tensor> out;
    out.reserve(vars.size());
    for (const auto& v : vars) out.push_back(v.value());
    return out;
}

struct StepStats {
    double d_loss = 0.0;
    double penalty = 0.0;
    double g_loss = 0.0;
    double bce = 0.0;
};

/// One critic update followed by one generator update on the same batch.
inline StepStats adversarial_step(const nn::Generator& gen, AdversarialPair& pair, const nn::Tensor& x,
                                  const nn::Tensor& cond, const nn::Tensor& y, Rng& rng, const StageConfig& cfg) {
    const nn::Discriminator disc;
    StepStats st;
    const nn::Tensor fake = generate(gen, pair.generator, x, x.shape.n);
    const std::vector<double> eps = nn::draw_epsilon(rng, x.shape.n);
    {
        nn::Tape tape;
        const nn::BoundParams dp = nn::bind(tape, pair.critic, true);
        const nn::Critic critic = [&](nn::Var c, nn::Var k) { return disc.forward(dp, c, k); };
        const bool fd = cfg.loss.penalty_mode == nn::PenaltyMode::finite_difference;
        const nn::CriticLoss loss =
            nn::d_loss(critic, tape.constant(fake), tape.constant(cond), y, eps, cfg.loss, !fd);
        std::vector<nn::Tensor> grads = values_of(tape.grad(loss.total, dp.vars));
        st.d_loss = loss.total.value().item();
        st.penalty = loss.penalty;
        if (fd) {
            const nn::Tensor y_hat = nn::interpolate(y, fake, eps);
            const nn::CriticFactory make = [&](nn::Tape& t, const std::vector<nn::Tensor>& values) {
                nn::NetParams p = pair.critic;
                p.tensors = values;
                auto bound = std::make_shared<nn::BoundParams>(nn::bind(t, p, false));
                return nn::Critic([bound, &disc](nn::Var c, nn::Var k) { return disc.forward(*bound, c, k); });
            };
            const auto pg = nn::penalty_gradient_fd(make, pair.critic.tensors, y_hat, cond, cfg.loss.alpha);
            for (std::size_t i = 0; i < grads.size(); ++i) {
                for (std::size_t j = 0; j < grads[i].numel(); ++j) grads[i].data[j] += pg[i].data[j];
            }
            nn::Tape pt;
            const nn::Critic critic_c = make(pt, pair.critic.tensors);
            nn::Var yh = pt.leaf(y_hat, true, "y_hat");
            st.penalty = nn::gradient_penalty(critic_c, yh, pt.constant(cond), cfg.loss.alpha).value().item();
            st.d_loss += st.penalty;
        }
        nn::adam_step(pair.critic, grads, pair.critic_state, cfg.adam);
    }
    {
        nn::Tape tape;
        const nn::BoundParams gp = nn::bind(tape, pair.generator, true);
        const nn::BoundParams dp = nn::bind(tape, pair.critic, false);
        const nn::Critic critic = [&](nn::Var c, nn::Var k) { return disc.forward(dp, c, k); };
        const nn::Var out = gen.forward(gp, tape.constant(x));
        const nn::GeneratorLoss loss = nn::g_loss(critic, out, tape.constant(cond), y, cfg.loss);
        nn::adam_step(pair.generator, values_of(tape.grad(loss.total, gp.vars)), pair.generator_state, cfg.adam);
        st.g_loss = loss.total.value().item();
        st.bce = loss.bce;
    }
    return st;
}

struct EpochMeans {
    StepStats sum;
    long steps = 0;

    void add(const StepStats& s) {
        sum.d_loss += s.d_loss;
        sum.penalty += s.penalty;
        sum.g_loss += s.g_loss;
        sum.bce += s.bce;
        ++steps;
    }

    LossRecord record(std::string stage, std::string network, int epoch) const {
        const double k = steps ? 1.0 / static_cast<double>(steps) : 0.0;
        return {std::move(stage), std::move(network), epoch, sum.d_loss * k, sum.penalty * k,
                sum.g_loss * k,   sum.bce * k,          steps};
    }
};

inline std::vector<std::vector<std::size_t>> epoch_batches(std::size_t count, int batch, Rng& rng) {
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order.begin(), order.end());
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t i = 0; i < count; i += static_cast<std::size_t>(batch)) {
        out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                         order.begin() + static_cast<std::ptrdiff_t>(std::min(count, i + batch)));
    }
    return out;
}

inline std::array<nn::Tensor, 3> gather(const std::vector<Sample>& samples, const std::vector<std::size_t>& idx) {
    std::vector<const nn::Tensor*> in, cond, tgt;
    for (std::size_t i : idx) {
        in.push_back(&samples[i].input);
        cond.push_back(&samples[i].condition);
        tgt.push_back(&samples[i].target);
    }
    return {stack(in), stack(cond), stack(tgt)};
}

/// Plain adversarial training of one pair over `samples`.
inline void train_pair(const nn::Generator& gen, AdversarialPair& pair, const std::vector<Sample>& samples,
                       int epochs, const std::string& stage, const std::string& network, Rng& rng,
                       const StageConfig& cfg, TrainingLog* log) {
    for (int epoch = 1; epoch <= epochs; ++epoch) {
        EpochMeans means;
        for (const auto& idx : epoch_batches(samples.size(), cfg.batch_size, rng)) {
            const auto [x, c, y] = gather(samples, idx);
            means.add(adversarial_step(gen, pair, x, c, y, rng, cfg));
            if (log) {
                ++log->critic_updates;
                ++log->generator_updates;
            }
        }
        if (log) log->push(means.record(stage, network, epoch));
    }
}

}  // namespace detail

/// Enhancement training samples for one channel: preprocessed input (also
/// the critic condition) and the pixel-sum target.
inline std::array<std::vector<Sample>, kChannelCount> enhancement_samples(const std::vector<PatchRecord>& patches,
                                                                          const PreprocessOption& opt, int size) {
    std::array<std::vector<Sample>, kChannelCount> out;
    for (const auto& p : patches) {
        const ChannelSet in = preprocess_stage(p.patch, opt, size);
        const auto targets = enhancement_targets(p.patch, p.gt_patch, opt, size);
        for (int c = 0; c < kChannelCount; ++c) {
            nn::Tensor x = to_tensor(in[c]);
            out[c].push_back(Sample{x, x, to_tensor(targets[c])});
        }
    }
    return out;
}

/// Four generators and one shared critic. Within each batch the channels
/// take turns: critic update on that channel's pairs, then that channel's
/// generator update.
inline EnhancementBundle train_enhancement(const std::vector<PatchRecord>& patches, const PreprocessOption& opt,
                                           const StageConfig& cfg, TrainingLog* log = nullptr) {
    cfg.validate();
    if (patches.empty()) throw Error(ErrorCode::invalid_argument, "train_enhancement: no patches");
    const auto samples = enhancement_samples(patches, opt, cfg.patch_size);
    const nn::Generator gen = enhancement_generator();

    std::array<AdversarialPair, kChannelCount> pairs;
    nn::NetParams critic = nn::Discriminator().init(derive_seed(cfg.seed, "enhancement/critic"));
    nn::AdamState critic_state;
    for (int c = 0; c < kChannelCount; ++c) {
        pairs[c].generator = gen.init(derive_seed(cfg.seed, std::string("enhancement/") + ChannelSet::names[c]));
    }
    Rng rng(derive_seed(cfg.seed, "enhancement/schedule"));
    for (int epoch = 1; epoch <= cfg.epochs_enhancement; ++epoch) {
        std::array<detail::EpochMeans, kChannelCount> means;
        for (const auto& idx : detail::epoch_batches(patches.size(), cfg.batch_size, rng)) {
            for (int c = 0; c < kChannelCount; ++c) {
                AdversarialPair& pair = pairs[c];
                pair.critic = std::move(critic);
                pair.critic_state = std::move(critic_state);
                const auto [x, k, y] = detail::gather(samples[c], idx);
                means[c].add(detail::adversarial_step(gen, pair, x, k, y, rng, cfg));
                critic = std::move(pair.critic);
                critic_state = std::move(pair.critic_state);
                if (log) {
                    ++log->critic_updates;
                    ++log->generator_updates;
                }
            }
        }
        if (log) {
            for (int c = 0; c < kChannelCount; ++c) {
                log->push(means[c].record("enhancement", std::string("generator-") + ChannelSet::names[c], epoch));
            }
        }
    }
    EnhancementBundle b;
    for (int c = 0; c < kChannelCount; ++c) b.generators[c] = std::move(pairs[c].generator);
    b.discriminator = std::move(critic);
    return b;
}

/// Merged enhancement output for a square patch of the generator size.
inline Plane enhance(const EnhancementBundle& b, const RasterImage& patch, const PreprocessOption& opt, int size) {
    if (!b.trained()) throw Error(ErrorCode::invalid_argument, "enhancement bundle is untrained");
    const ChannelSet in = preprocess_stage(patch, opt, size);
    const nn::Generator gen = enhancement_generator();
    std::array<Plane, kChannelCount> out;
    for (int c = 0; c < kChannelCount; ++c) out[c] = plane_of(generate(gen, b.generators[c], to_tensor(in[c])));
    return merge_enhanced(out);
}

struct LocalSample {
    Plane input;  // merged enhancement output
    BinaryImage gt;
};

inline std::vector<LocalSample> local_samples(const EnhancementBundle& b, const std::vector<PatchRecord>& patches,
                                              const PreprocessOption& opt, int size) {
    std::vector<LocalSample> out;
    out.reserve(patches.size());
    for (const auto& p : patches) out.push_back({enhance(b, p.patch, opt, size), resize_nearest(p.gt_patch, size, size)});
    return out;
}

/// Independent local (merged enhancement patch) and global (whole page in
/// RGB) adversarial trainings, local first.
inline BinarizationBundle train_binarization(const std::vector<LocalSample>& local,
                                             const std::vector<GlobalRecord>& globals, const StageConfig& cfg,
                                             TrainingLog* log = nullptr) {
    cfg.validate();
    if (local.empty() || globals.empty()) throw Error(ErrorCode::invalid_argument, "train_binarization: no samples");
    std::vector<Sample> ls, gs;
    for (const auto& s : local) {
        require_same_size(s.input, s.gt, "train_binarization");
        nn::Tensor x = to_tensor(s.input);
        ls.push_back({x, x, to_tensor(s.gt)});
    }
    for (const auto& g : globals) {
        require_same_size(g.image, g.gt, "train_binarization");
        nn::Tensor x = to_tensor(g.image);
        gs.push_back({x, x, to_tensor(g.gt)});
    }
    const nn::Discriminator disc;
    AdversarialPair lp{local_generator().init(derive_seed(cfg.seed, "binarization/local")),
                       disc.init(derive_seed(cfg.seed, "binarization/local-critic")),
                       {},
                       {}};
    AdversarialPair gp{global_generator().init(derive_seed(cfg.seed, "binarization/global")),
                       disc.init(derive_seed(cfg.seed, "binarization/global-critic")),
                       {},
                       {}};
    Rng local_rng(derive_seed(cfg.seed, "binarization/local-schedule"));
    Rng global_rng(derive_seed(cfg.seed, "binarization/global-schedule"));
    detail::train_pair(local_generator(), lp, ls, cfg.epochs_binarization, "binarization", "local", local_rng, cfg, log);
    detail::train_pair(global_generator(), gp, gs, cfg.epochs_binarization, "binarization", "global", global_rng, cfg,
                       log);
    return {std::move(lp.generator), std::move(lp.critic), std::move(gp.generator), std::move(gp.critic)};
}

}  // namespace docbin

#endif  // DOCBIN_PIPELINE_TRAINING_HPP
