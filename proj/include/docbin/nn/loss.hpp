#ifndef DOCBIN_NN_LOSS_HPP
#define DOCBIN_NN_LOSS_HPP

#include <functional>
#include <memory>
#include <vector>

#include "docbin/core/random.hpp"
#include "docbin/nn/autograd.hpp"

namespace docbin::nn {

enum class PenaltyMode {
    reverse_over_reverse,  // second reverse pass through the recorded input gradient
    finite_difference,     // central differences over critic parameters, for cross-checking
};

struct LossConfig {
    double alpha = 10.0;   // gradient-penalty coefficient
    double lambda = 50.0;  // BCE weight in the generator objective
    PenaltyMode penalty_mode = PenaltyMode::reverse_over_reverse;

    void validate() const {
        if (!(alpha > 0.0) || !(lambda >= 0.0)) {
            throw Error(ErrorCode::invalid_argument, "alpha must be positive and lambda non-negative");
        }
    }
};

/// Critic applied to (candidate, condition); returns (N,1,1,1) scores.
using Critic = std::function<Var(Var candidate, Var condition)>;

inline constexpr double kProbClamp = 1e-7;

/// y_hat = eps * real + (1 - eps) * fake with one eps per sample.
inline Tensor interpolate(const Tensor& real, const Tensor& fake, const std::vector<double>& eps) {
    require_shape(fake.shape, real.shape, "interpolate");
    if (eps.size() != static_cast<std::size_t>(real.shape.n)) {
        throw Error(ErrorCode::shape_mismatch, "one interpolation weight per sample required");
    }
    Tensor out(real.shape);
    const std::size_t m = real.shape.sample_size();
    for (int n = 0; n < real.shape.n; ++n) {
        for (std::size_t i = n * m; i < (n + 1) * m; ++i) {
            out.data[i] = eps[n] * real.data[i] + (1.0 - eps[n]) * fake.data[i];
        }
    }
    return out;
}

inline std::vector<double> draw_epsilon(Rng& rng, int n) {
    std::vector<double> e(n);
    for (double& v : e) v = rng.uniform();
    return e;
}

/// alpha * mean_n (||grad_{y_hat} D(y_hat, x)_n||_2 - 1)^2.
/// The input gradient is obtained by a reverse pass recorded on the tape, so
/// the returned node stays differentiable with respect to the critic
/// parameters.
inline Var gradient_penalty(const Critic& critic, Var y_hat, Var condition, double alpha) {
    using namespace ops;
    Tape& tape = *y_hat.tape;
    if (!y_hat.requires_grad()) throw Error(ErrorCode::invalid_argument, "y_hat must be a differentiable leaf");
    Var scores = sum_all(critic(y_hat, condition));
    const Var wrt[] = {y_hat};
    Var g = tape.grad(scores, wrt, /*create_graph=*/true)[0];
    Var norms = sqrt(sample_sum(mul(g, g)));
    return scale(mean_all(square(add_scalar(norms, -1.0))), alpha);
}

/// Builds a critic on `tape` from explicit parameter values.
using CriticFactory = std::function<Critic(Tape& tape, const std::vector<Tensor>& params)>;

/// Parameter gradient of the penalty by central differences, two penalty
/// evaluations per parameter element. Only practical for small critics.
inline std::vector<Tensor> penalty_gradient_fd(const CriticFactory& make, std::vector<Tensor> params,
                                               const Tensor& y_hat, const Tensor& condition, double alpha,
                                               double h = 1e-5) {
    const auto penalty_at = [&]() {
        Tape tape;
        const Critic critic = make(tape, params);
        Var yh = tape.leaf(y_hat, true, "y_hat");
        return gradient_penalty(critic, yh, tape.constant(condition), alpha).value().item();
    };
    std::vector<Tensor> grads;
    grads.reserve(params.size());
    for (auto& t : params) {
        Tensor g(t.shape, 0.0);
        for (std::size_t i = 0; i < t.numel(); ++i) {
            const double orig = t.data[i];
            t.data[i] = orig + h;
            const double up = penalty_at();
            t.data[i] = orig - h;
            const double down = penalty_at();
            t.data[i] = orig;
            g.data[i] = (up - down) / (2.0 * h);
        }
        grads.push_back(std::move(g));
    }
    return grads;
}

/// Binary cross-entropy -mean[y log p + (1-y) log(1-p)], p clamped to
/// [1e-7, 1-1e-7]. Targets may be soft but must lie in [0,1].
inline Var bce(Var p, const Tensor& target) {
    using namespace ops;
    require_shape(target.shape, p.shape(), "bce");
    auto y = std::make_shared<Tensor>(target);
    auto not_y = std::make_shared<Tensor>(target.shape);
    for (std::size_t i = 0; i < target.numel(); ++i) {
        const double v = target.data[i];
        if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorCode::invalid_argument, "BCE target outside [0,1]");
        not_y->data[i] = 1.0 - v;
    }
    Var pc = clamp(p, kProbClamp, 1.0 - kProbClamp);
    Var ll = add(mul_const(log(pc), y), mul_const(log(add_scalar(scale(pc, -1.0), 1.0)), not_y));
    return scale(mean_all(ll), -1.0);
}

struct CriticLoss {
    Var total;
    double real_score = 0.0;  // mean D(y, x)
    double fake_score = 0.0;  // mean D(G(x), x)
    double penalty = 0.0;
};

/// -mean D(y,x) + mean D(G(x),x) + penalty. `fake` is the generator output
/// and must not carry a gradient; `eps` are the per-sample interpolation
/// weights of y_hat.
inline CriticLoss d_loss(const Critic& critic, Var fake, Var condition, const Tensor& real,
                         const std::vector<double>& eps, const LossConfig& cfg, bool with_penalty = true) {
    using namespace ops;
    cfg.validate();
    Tape& tape = *fake.tape;
    if (fake.requires_grad()) throw Error(ErrorCode::invalid_argument, "d_loss: generator output must be constant");
    Var real_v = tape.constant(real);
    Var real_term = mean_all(critic(real_v, condition));
    Var fake_term = mean_all(critic(fake, condition));
    CriticLoss out;
    out.real_score = real_term.value().item();
    out.fake_score = fake_term.value().item();
    out.total = sub(fake_term, real_term);
    if (with_penalty) {
        Var y_hat = tape.leaf(interpolate(real, fake.value(), eps), true, "y_hat");
        Var gp = gradient_penalty(critic, y_hat, condition, cfg.alpha);
        out.penalty = gp.value().item();
        out.total = add(out.total, gp);
    }
    return out;
}

struct GeneratorLoss {
    Var total;
    double adversarial = 0.0;  // -mean D(G(x), x)
    double bce = 0.0;
};

/// -mean D(G(x),x) + lambda * BCE(G(x), y). Critic parameters should be
/// bound as constants so no gradient reaches them.
inline GeneratorLoss g_loss(const Critic& critic, Var fake, Var condition, const Tensor& target, const LossConfig& cfg) {
    using namespace ops;
    cfg.validate();
    Var adv = scale(mean_all(critic(fake, condition)), -1.0);
    Var b = bce(fake, target);
    GeneratorLoss out;
    out.adversarial = adv.value().item();
    out.bce = b.value().item();
    out.total = add(adv, scale(b, cfg.lambda));
    return out;
}

}  // namespace docbin::nn

#endif  // DOCBIN_NN_LOSS_HPP
